#pragma once

#include "knn.hpp"
#include "lstm.hpp"
#include "mlp.hpp"

#include <string>

namespace gridfdd {

/// Model checkpoints: a short text header (kind, shapes, hyperparameters,
/// seed, tensor sizes in order) terminated by a `data N` line, followed by
/// N raw little-endian 64-bit floats. Headers diff cleanly; payloads
/// round-trip bit-exactly.

void save_lstm(const std::string& path, const LstmModel& m);
LstmModel load_lstm(const std::string& path);

void save_mlp(const std::string& path, const MlpModel& m);
MlpModel load_mlp(const std::string& path);

void save_knn(const std::string& path, const KnnModel& m);
KnnModel load_knn(const std::string& path);

/// "lstm", "mlp", or "knn". Throws IoError for anything unrecognizable.
std::string checkpoint_kind(const std::string& path);

} // namespace gridfdd
