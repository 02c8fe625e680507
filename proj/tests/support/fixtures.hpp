#pragma once

#include "rdsnet/dataset.hpp"

#include <array>
#include <filesystem>
#include <string>

namespace fixtures {

// Status codes used by the builder: 0 negative, 1 positive, 2 missing.
struct ForestShape {
    std::array<int, 3> seeds{};
    // dyads[recruiter status][recruit status]
    std::array<std::array<int, 3>, 3> dyads{};
    int max_recruits = 3;
    int degree = 5;
};

// Builds a recruitment forest with exactly the requested seed and dyad counts.
rdsnet::RdsDataset build_forest(const ForestShape& shape, const std::string& outcome = "outcome");

// 658 participants, 30 seeds; HIV dyads [[478,27],[33,10]] with 80 dropped,
// 49 positives among 621 observed.
ForestShape hiv_shape();

// Syphilis dyads [[481,49],[70,19]]; 9 dyads dropped by missing recruits.
ForestShape syphilis_shape();

// 658 participants, all observed, 76 positive.
ForestShape syphilis_prevalence_shape();

std::string to_csv(const rdsnet::RdsDataset& ds);
rdsnet::RdsDataset from_csv(const std::string& text);

// Scratch directory unique to the running test binary.
std::filesystem::path scratch_dir(const std::string& name);
void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace fixtures
