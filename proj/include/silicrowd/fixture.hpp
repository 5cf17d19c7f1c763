#pragma once

#include <string>

#include "silicrowd/store.hpp"

namespace silicrowd {

struct FixturePaths {
    std::string bundle;
    std::string study1_log;
    std::string study2_log;
};

// Deterministic synthetic tournament: 12 models x 31 questions x 3
// repetitions for the ensemble study (1007 Ok forecasts, 109 missing) and
// 2 models x 31 x 3 x 2 phases for the updating study (all Ok). Every byte
// of the output depends only on the fixed seed built into the generator.
TournamentBundle fixture_bundle();
FixturePaths generate_fixture(const std::string& out_dir);

}  // namespace silicrowd
