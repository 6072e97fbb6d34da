#pragma once

#include <filesystem>
#include <iosfwd>

#include <nlohmann/json.hpp>

#include "sgdlab/harness/compare.hpp"
#include "sgdlab/harness/ensemble.hpp"

namespace sgdlab {

nlohmann::json fractions_json(const EnsembleResult& r);

void write_runs_csv(std::ostream& os, const EnsembleResult& r);
void write_compare_csv(std::ostream& os, const CompareReport& c);

// Writes <dir>/<name>.runs.csv, <name>.fractions.json and, when trajectories
// were kept, <name>.run<i>.csv. Returns the written paths.
std::vector<std::filesystem::path> export_ensemble(const EnsembleResult& r,
                                                   const std::filesystem::path& dir);
std::filesystem::path export_compare(const CompareReport& c, const std::filesystem::path& dir,
                                     const std::string& name);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace sgdlab
