#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "tbcnn/model.hpp"
#include "tbcnn/rae.hpp"
#include "tbcnn/trainer.hpp"

namespace tbcnn {

inline constexpr int kCheckpointVersion = 1;

// Layout: a magic line "TBCNN-CKPT <version>", a line holding the byte
// length of the JSON header, the header, a newline, then every array as
// row-major little-endian float64 in header order. Saving the same model
// twice yields identical bytes.
struct Checkpoint {
  Model model;
  TrainConfig config;
};

void save_checkpoint(std::ostream& out, const Model& model, const TrainConfig& config);
void save_checkpoint_file(const std::filesystem::path& path, const Model& model,
                          const TrainConfig& config);
// Throws DataError on a bad magic line, version mismatch, truncated payload
// or arrays whose names or shapes do not fit the declared model.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint_file(const std::filesystem::path& path);

// Standalone composition parameters ("TBCNN-RAE <version>").
void save_rae(std::ostream& out, const CompositionParams& params);
void save_rae_file(const std::filesystem::path& path, const CompositionParams& params);
CompositionParams load_rae(std::istream& in);
CompositionParams load_rae_file(const std::filesystem::path& path);

}  // namespace tbcnn
