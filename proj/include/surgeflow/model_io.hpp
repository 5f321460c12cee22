#pragma once

#include <filesystem>

#include "surgeflow/forecast.hpp"

namespace surgeflow::forecast {

inline constexpr const char* kModelFormat = "surgeflow-lstm/1";

// Model as a single JSON document; matrices are nested row-major arrays.
void save_model(const LstmModel& model, const std::filesystem::path& path);
LstmModel load_model(const std::filesystem::path& path);

// History CSV with header `epoch,train_loss,val_loss`, epochs 1-based.
void save_history(const TrainReport& report, const std::filesystem::path& path);

}  // namespace surgeflow::forecast
