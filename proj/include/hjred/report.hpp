#pragma once

#include <nlohmann/json.hpp>

#include "hjred/dynamics.hpp"

namespace hjred {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 42;

struct AnalysisOptions {
    std::uint64_t seed = kDefaultSeed;
    std::map<std::string, double> constant_overrides;
};

/// Full pipeline result: model, Legendre transform, flow tables, constraint
/// chain with classifications.
struct Analysis {
    Model model;
    HJSystem sys;
    EomTable eom;
    ChainReport chain;
    std::uint64_t seed = kDefaultSeed;
};

Analysis run_analysis(Model model, const AnalysisOptions& opts = {});

nlohmann::ordered_json to_json(const Analysis& a);
std::string to_text(const Analysis& a);

} // namespace hjred
