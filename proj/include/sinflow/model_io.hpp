#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sinflow/dataset_io.hpp"
#include "sinflow/flow.hpp"

namespace sinflow {

/// A trained flow plus the preprocessing it expects; everything needed to
/// evaluate densities or draw samples without the training config.
struct SavedModel {
    Flow flow;
    Preprocess preprocess;
};

/// Versioned binary container, magic "SINF". All floats are written as
/// 64-bit little-endian, so a save/load roundtrip reproduces log-densities
/// and samples bit for bit.
std::vector<std::uint8_t> serialize_model(const SavedModel& model);
SavedModel deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const std::string& path, const SavedModel& model);
SavedModel load_model(const std::string& path);

}  // namespace sinflow
