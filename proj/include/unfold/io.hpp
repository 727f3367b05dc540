#pragma once

#include "unfold/oos.hpp"
#include "unfold/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace unfold::io {

using Json = nlohmann::ordered_json;

/// Point CSV: header x0,...,x{d-1}[,label], one point per row.
void write_points_csv(const std::filesystem::path& path, const Matrix& points,
                      const std::vector<std::string>* labels = nullptr);
/// Reads a point CSV; a trailing `label` column becomes Dataset::labels.
Dataset read_points_csv(const std::filesystem::path& path);

/// Numeric CSV with header prefix0,...,prefix{c-1}; rows of `m` become rows of the file.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::string& prefix);
/// Same with explicit column names.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header);
/// Any all-numeric CSV with a header row.
Matrix read_matrix_csv(const std::filesystem::path& path);

/// One action per line (a header line `action` is skipped); blank lines are rejected.
std::vector<std::string> read_actions(const std::filesystem::path& path);

/// `key = value` lines; `#` starts a comment. Duplicate keys are an error.
std::map<std::string, std::string> read_config(const std::filesystem::path& path);

/// FNV-1a over the raw doubles of a matrix, as 16 hex digits.
std::string digest(const Matrix& m);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json to_json(const oos::EigenModel& model);
Json to_json(const oos::KernelMap& model);
/// Either scheme; `scheme` names which one the file holds.
struct SavedModel {
    std::string scheme;  // "eigen" or "kernel-map"
    oos::EigenModel eigen;
    oos::KernelMap kernel_map;
};
SavedModel model_from_json(const Json& j);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace unfold::io
