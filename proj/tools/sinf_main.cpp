// sinf: train, sample and evaluate sliced iterative normalizing flows.
//
// Subcommands:
//   train   fit a SIG or GIS flow and write a model file
//   sample  draw samples from a saved model
//   logp    per-row log-densities of a dataset under a saved model
//   ood     AUROC of in- vs out-of-distribution log-density scores
//   swd     sliced / max-K-sliced Wasserstein distances between datasets

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sinflow/dataset_io.hpp"
#include "sinflow/metrics.hpp"
#include "sinflow/model_io.hpp"
#include "sinflow/rng.hpp"
#include "sinflow/training.hpp"

namespace {

using namespace sinflow;

FileFormat parse_format(const std::string& s) {
    if (s == "csv") return FileFormat::Csv;
    if (s == "bin") return FileFormat::Binary;
    throw std::runtime_error("unknown format '" + s + "' (expected csv or bin)");
}

struct TrainOptions {
    std::string data_path;
    std::string format = "csv";
    std::string out_path = "model.sinf";
    std::string report_path;
    std::string config_path;
    std::optional<std::string> mode;    // sig | gis
    std::optional<std::string> preset;  // high | low
    std::optional<std::size_t> k;
    std::optional<std::size_t> max_layers;
    std::optional<int> stiefel_max_iter;
    std::optional<double> alpha1, alpha2;
    std::optional<int> knots;
    std::optional<double> kde_b, kde_width;
    std::optional<double> validation_fraction;
    std::optional<int> patience;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> axes;  // greedy | random
    std::optional<double> p;
    std::optional<std::string> preprocess;  // none | logit
    std::optional<double> lambda;
    std::optional<std::string> image;           // "S,c"
    std::optional<std::string> patch_schedule;  // auto | none | q:depth:K:iters,...
};

template <typename T>
T parse_value(const std::string& s) {
    std::istringstream in(s);
    T v{};
    if (!(in >> v) || !(in >> std::ws).eof())
        throw std::runtime_error("bad config value '" + s + "'");
    return v;
}

void load_config_file(const std::string& path, TrainOptions& opt) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::runtime_error(path + ": expected key=value at line " +
                                         std::to_string(line_no));
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::runtime_error(path + ": empty key or value at line " +
                                     std::to_string(line_no));
        if (key == "mode") opt.mode = val;
        else if (key == "preset") opt.preset = val;
        else if (key == "k") opt.k = parse_value<std::size_t>(val);
        else if (key == "max_layers") opt.max_layers = parse_value<std::size_t>(val);
        else if (key == "stiefel_max_iter") opt.stiefel_max_iter = parse_value<int>(val);
        else if (key == "alpha1") opt.alpha1 = parse_value<double>(val);
        else if (key == "alpha2") opt.alpha2 = parse_value<double>(val);
        else if (key == "knots") opt.knots = parse_value<int>(val);
        else if (key == "kde_b") opt.kde_b = parse_value<double>(val);
        else if (key == "kde_width") opt.kde_width = parse_value<double>(val);
        else if (key == "validation_fraction")
            opt.validation_fraction = parse_value<double>(val);
        else if (key == "patience") opt.patience = parse_value<int>(val);
        else if (key == "seed") opt.seed = parse_value<std::uint64_t>(val);
        else if (key == "axes") opt.axes = val;
        else if (key == "p") opt.p = parse_value<double>(val);
        else if (key == "preprocess") opt.preprocess = val;
        else if (key == "lambda") opt.lambda = parse_value<double>(val);
        else if (key == "image") opt.image = val;
        else if (key == "patch_schedule") opt.patch_schedule = val;
        else
            throw std::runtime_error(path + ": unknown key '" + key + "' at line " +
                                     std::to_string(line_no));
    }
}

ImageShape parse_image_shape(const std::string& s) {
    const std::size_t comma = s.find(',');
    if (comma == std::string::npos)
        throw std::runtime_error("--image expects S,c (e.g. 28,1)");
    ImageShape shape;
    shape.side = parse_value<std::size_t>(s.substr(0, comma));
    shape.channels = parse_value<std::size_t>(s.substr(comma + 1));
    if (shape.side < 1 || shape.channels < 1) throw std::runtime_error("bad --image shape");
    return shape;
}

PatchSchedule parse_patch_schedule(const std::string& s, const ImageShape& shape) {
    if (s == "auto") return default_schedule(shape.side, shape.channels);
    PatchSchedule stages;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::istringstream fields(item);
        std::string q, depth, k, iters;
        if (!std::getline(fields, q, ':') || !std::getline(fields, depth, ':') ||
            !std::getline(fields, k, ':') || !std::getline(fields, iters, ':'))
            throw std::runtime_error("bad patch schedule stage '" + item +
                                     "' (expected q:full|single:K:iters)");
        PatchStage stage;
        stage.patch_side = parse_value<std::size_t>(q);
        if (depth == "full") stage.single_channel = false;
        else if (depth == "single") stage.single_channel = true;
        else throw std::runtime_error("bad patch depth '" + depth + "'");
        stage.axes = parse_value<std::size_t>(k);
        stage.iterations = parse_value<std::size_t>(iters);
        stages.push_back(stage);
    }
    if (stages.empty()) throw std::runtime_error("empty patch schedule");
    return stages;
}

Preprocess parse_preprocess(const std::optional<std::string>& kind,
                            const std::optional<double>& lambda) {
    Preprocess pre;
    if (kind && *kind == "logit") pre.kind = Preprocess::Kind::Logit;
    else if (kind && *kind != "none")
        throw std::runtime_error("unknown preprocess '" + *kind + "'");
    if (lambda) pre.lambda = *lambda;
    return pre;
}

int cmd_train(const TrainOptions& opt) {
    if (opt.data_path.empty()) throw std::runtime_error("train: --data is required");
    const FileFormat format = parse_format(opt.format);
    const Preprocess pre = parse_preprocess(opt.preprocess, opt.lambda);
    std::optional<ImageShape> image;
    if (opt.image) image = parse_image_shape(*opt.image);
    LoadedDataset loaded = load_dataset(opt.data_path, format, pre, image);
    const std::size_t n = loaded.dataset.data.rows(), d = loaded.dataset.data.cols();

    const std::string mode = opt.mode.value_or("");
    if (mode != "sig" && mode != "gis")
        throw std::runtime_error("train: --mode must be sig or gis");

    TrainConfig cfg;
    if (opt.preset) {
        if (*opt.preset == "high") cfg = small_data_presets(n, d, PresetMode::HighAlpha);
        else if (*opt.preset == "low") cfg = small_data_presets(n, d, PresetMode::LowAlpha);
        else throw std::runtime_error("unknown preset '" + *opt.preset + "'");
    }
    if (opt.k) cfg.k = *opt.k;
    if (opt.max_layers) cfg.max_layers = *opt.max_layers;
    if (opt.stiefel_max_iter) cfg.stiefel_max_iter = *opt.stiefel_max_iter;
    if (opt.alpha1) cfg.alpha_spline = *opt.alpha1;
    if (opt.alpha2) cfg.alpha_tail = *opt.alpha2;
    if (opt.knots) cfg.knot_count = *opt.knots;
    if (opt.kde_b) cfg.kde.width_factor_b = *opt.kde_b;
    if (opt.kde_width) cfg.kde.explicit_width = *opt.kde_width;
    if (opt.validation_fraction) cfg.validation_fraction = *opt.validation_fraction;
    if (opt.patience) cfg.patience = *opt.patience;
    if (opt.seed) cfg.rng_seed = *opt.seed;
    if (opt.p) cfg.p = *opt.p;
    if (opt.axes) {
        if (*opt.axes == "greedy") cfg.axes = AxisSelection::Greedy;
        else if (*opt.axes == "random") cfg.axes = AxisSelection::Random;
        else throw std::runtime_error("unknown axes mode '" + *opt.axes + "'");
    }
    if (opt.patch_schedule && *opt.patch_schedule != "none") {
        if (!image) throw std::runtime_error("patch schedule requires --image S,c");
        cfg.patch_schedule = parse_patch_schedule(*opt.patch_schedule, *image);
    }
    if (mode == "gis" && cfg.patience > 0 && cfg.validation_fraction <= 0.0)
        cfg.validation_fraction = 0.15;  // early stopping needs a held-out split

    auto [flow, report] = (mode == "sig") ? train_sig(loaded.dataset, cfg)
                                          : train_gis(loaded.dataset, cfg);

    SavedModel model{std::move(flow), loaded.preprocess};
    save_model(opt.out_path, model);

    std::printf("trained %s flow: %zu layers in %.2f s, final max-K-SWD %.6g\n", mode.c_str(),
                report.layers_built, report.wall_seconds,
                report.objective_trace.empty() ? 0.0 : report.objective_trace.back());
    if (!report.validation_logp.empty())
        std::printf("validation logp: start %.6f best %.6f\n", report.validation_logp.front(),
                    report.validation_logp[report.layers_built]);
    std::printf("model written to %s\n", opt.out_path.c_str());

    if (!opt.report_path.empty()) {
        std::ofstream out(opt.report_path);
        if (!out) throw std::runtime_error("cannot write " + opt.report_path);
        out << "# iteration, max_k_swd";
        if (!report.validation_logp.empty()) out << ", validation_logp";
        out << "\n";
        for (std::size_t i = 0; i < report.objective_trace.size(); ++i) {
            out << i + 1 << ", " << report.objective_trace[i];
            if (i + 1 < report.validation_logp.size())
                out << ", " << report.validation_logp[i + 1];
            out << "\n";
        }
    }
    return 0;
}

std::vector<double> model_scores(const SavedModel& model, const std::string& path,
                                 FileFormat format) {
    Matrix raw = load_matrix(path, format);
    std::vector<double> pre_jac = preprocess_log_jacobian(model.preprocess, raw);
    apply_preprocess(model.preprocess, raw);
    std::vector<LogDensityReport> reports = flow_log_density(model.flow, raw);
    std::vector<double> scores(reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) scores[i] = reports[i].logp + pre_jac[i];
    return scores;
}

int cmd_sample(const std::string& model_path, std::size_t n, double temperature,
               std::uint64_t seed, const std::string& out_path, const std::string& format) {
    SavedModel model = load_model(model_path);
    Matrix samples = flow_sample(model.flow, n, temperature, seed);
    invert_preprocess(model.preprocess, samples);
    save_matrix(out_path, samples, parse_format(format));
    std::printf("wrote %zu samples (d=%zu) to %s\n", samples.rows(), samples.cols(),
                out_path.c_str());
    return 0;
}

int cmd_logp(const std::string& model_path, const std::string& data_path,
             const std::string& format, const std::string& out_path) {
    SavedModel model = load_model(model_path);
    const std::vector<double> scores = model_scores(model, data_path, parse_format(format));
    if (out_path.empty()) {
        for (double s : scores) std::printf("%.17g\n", s);
    } else {
        Matrix column(scores.size(), 1);
        for (std::size_t i = 0; i < scores.size(); ++i) column(i, 0) = scores[i];
        write_csv(out_path, column);
        std::printf("wrote %zu log-densities to %s\n", scores.size(), out_path.c_str());
    }
    return 0;
}

int cmd_ood(const std::string& model_path, const std::string& in_path,
            const std::string& out_path_data, const std::string& format,
            const std::string& report_path) {
    SavedModel model = load_model(model_path);
    const FileFormat fmt = parse_format(format);
    const std::vector<double> in_scores = model_scores(model, in_path, fmt);
    const std::vector<double> out_scores = model_scores(model, out_path_data, fmt);
    OodReport report;
    report.auroc = auroc(in_scores, out_scores);
    report.n_in = in_scores.size();
    report.n_out = out_scores.size();
    std::ostringstream text;
    text << "auroc=" << report.auroc << "\n"
         << "n_in=" << report.n_in << "\n"
         << "n_out=" << report.n_out << "\n"
         << "score=" << report.score_kind << "\n";
    std::fputs(text.str().c_str(), stdout);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw std::runtime_error("cannot write " + report_path);
        out << text.str();
    }
    return 0;
}

int cmd_swd(const std::string& path_a, const std::string& path_b, const std::string& format,
            std::size_t k, int projections, int restarts, int max_iter, double p,
            std::uint64_t seed) {
    const FileFormat fmt = parse_format(format);
    Matrix a = load_matrix(path_a, fmt);
    Matrix b = load_matrix(path_b, fmt);
    if (a.cols() != b.cols()) throw std::runtime_error("swd: datasets differ in dimension");
    if (a.rows() != b.rows()) {
        const std::size_t n = std::min(a.rows(), b.rows());
        std::fprintf(stderr, "swd: subsampling the larger dataset to %zu rows\n", n);
        if (a.rows() > n) a = subsample_rows(a, n, mix_seed(seed, 11));
        if (b.rows() > n) b = subsample_rows(b, n, mix_seed(seed, 12));
    }
    if (projections > 0)
        std::printf("swd=%.6g\n", sliced_wasserstein(a, b, projections, p, mix_seed(seed, 1)));
    MaxSwdResult res = max_k_swd_restarts(a, b, k, p, max_iter, {}, restarts, mix_seed(seed, 2));
    std::printf("max_k_swd=%.6g\n", res.distance);
    std::printf("k=%zu restarts=%d converged=%d\n", k, restarts, res.converged ? 1 : 0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sliced iterative normalizing flows"};
    app.require_subcommand(1);

    TrainOptions topt;
    // --config is loaded before the regular parse so flags override file keys
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") topt.config_path = argv[i + 1];

    try {
        if (!topt.config_path.empty()) load_config_file(topt.config_path, topt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    auto* train = app.add_subcommand("train", "fit a flow on a dataset");
    train->add_option("--data", topt.data_path, "input dataset");
    train->add_option("--format", topt.format, "csv or bin");
    train->add_option("--out", topt.out_path, "output model file");
    train->add_option("--report", topt.report_path, "write per-iteration traces here");
    train->add_option("--config", topt.config_path, "key=value config file");
    train->add_option("--mode", topt.mode, "sig or gis");
    train->add_option("--preset", topt.preset, "high or low (small-data GIS presets)");
    train->add_option("--k", topt.k, "slice axes per iteration");
    train->add_option("--iters", topt.max_layers, "maximum iterations (layers)");
    train->add_option("--stiefel-iters", topt.stiefel_max_iter,
                      "Stiefel ascent cap per iteration (0 = auto N/d)");
    train->add_option("--alpha1", topt.alpha1, "spline regularization in [0,1)");
    train->add_option("--alpha2", topt.alpha2, "tail regularization in [0,1)");
    train->add_option("--knots", topt.knots, "spline knots (0 = auto)");
    train->add_option("--kde-b", topt.kde_b, "KDE width factor b");
    train->add_option("--lambda", topt.lambda, "logit squeeze constant");
    train->add_option("--preprocess", topt.preprocess, "none or logit");
    train->add_option("--val-frac", topt.validation_fraction, "validation fraction");
    train->add_option("--patience", topt.patience, "early-stopping patience (GIS)");
    train->add_option("--seed", topt.seed, "rng seed");
    train->add_option("--axes", topt.axes, "greedy or random axis selection");
    train->add_option("--p", topt.p, "Wasserstein order");
    train->add_option("--image", topt.image, "image shape S,c");
    train->add_option("--patch-schedule", topt.patch_schedule,
                      "auto, none, or q:full|single:K:iters[,...]");

    std::string model_path, out_path, data_path, format = "csv", report_path;
    std::size_t n = 1000;
    double temperature = 1.0;
    std::uint64_t seed = 0;

    auto* sample = app.add_subcommand("sample", "draw samples from a model");
    sample->add_option("--model", model_path)->required();
    sample->add_option("--n", n, "sample count");
    sample->add_option("--temperature", temperature, "latent standard deviation");
    sample->add_option("--seed", seed);
    sample->add_option("--out", out_path, "output file")->required();
    sample->add_option("--format", format, "csv or bin");

    auto* logp = app.add_subcommand("logp", "per-row log-densities");
    logp->add_option("--model", model_path)->required();
    logp->add_option("--data", data_path)->required();
    logp->add_option("--format", format, "csv or bin");
    logp->add_option("--out", out_path, "output CSV (default: stdout)");

    std::string in_path, ood_out_path;
    auto* ood = app.add_subcommand("ood", "AUROC of log-density scores");
    ood->add_option("--model", model_path)->required();
    ood->add_option("--in-data", in_path, "in-distribution dataset")->required();
    ood->add_option("--out-data", ood_out_path, "out-of-distribution dataset")->required();
    ood->add_option("--format", format, "csv or bin");
    ood->add_option("--out", report_path, "also write the report here");

    std::string path_a, path_b;
    std::size_t swd_k = 1;
    int projections = 0, restarts = 10, max_iter = 200;
    double order = 2.0;
    auto* swd = app.add_subcommand("swd", "sliced Wasserstein distances");
    swd->add_option("--data-a", path_a)->required();
    swd->add_option("--data-b", path_b)->required();
    swd->add_option("--format", format, "csv or bin");
    swd->add_option("--k", swd_k, "orthogonal axes for max-K-SWD");
    swd->add_option("--projections", projections, "Monte Carlo projections for SWD");
    swd->add_option("--restarts", restarts, "optimizer restarts");
    swd->add_option("--max-iter", max_iter, "Stiefel ascent iterations");
    swd->add_option("--p", order, "Wasserstein order");
    swd->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(topt);
        if (sample->parsed())
            return cmd_sample(model_path, n, temperature, seed, out_path, format);
        if (logp->parsed()) return cmd_logp(model_path, data_path, format, out_path);
        if (ood->parsed()) return cmd_ood(model_path, in_path, ood_out_path, format, report_path);
        if (swd->parsed())
            return cmd_swd(path_a, path_b, format, swd_k, projections, restarts, max_iter,
                           order, seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
