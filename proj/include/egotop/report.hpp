#pragma once

#include <string>
#include <vector>

#include "egotop/eval.hpp"
#include "egotop/io.hpp"

namespace egotop {

Json to_json(const CmcCurve& c);
Json to_json(const HardAssignment& x, const ViewGraph& ego, const ViewGraph& top);
Json to_json(const TopviewRanking& r);
Json to_json(const CompletenessSweep& s);
Json to_json(std::span<const LengthRow> rows);
Json to_json(std::span<const BaselineRow> rows);
Json to_json(const PipelineConfig& cfg);

/// Match report for one scenario. Accuracy and CMC appear only when truth is known.
Json match_report(const SceneGraphs& g, const PipelineResult& r, std::span<const std::size_t> truth,
                  const PipelineConfig& cfg);

/// Copy with every "timing" member removed, at any depth.
Json without_timing(const Json& j);

std::string cmc_csv(const CmcCurve& c);
std::string completeness_csv(const CompletenessSweep& s);
std::string length_csv(std::span<const LengthRow> rows);
std::string baselines_csv(std::span<const BaselineRow> rows);
std::string ranking_csv(const TopviewRanking& r);

}  // namespace egotop
