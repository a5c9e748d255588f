#pragma once

#include "geomdyn/liealg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace geomdyn::acceptance {

struct Options {
  // SecondOrderSeries swaps the closed-form dexpinv for the truncated series
  // everywhere, as a mutation check of the suite itself.
  DexpinvMode dexpinv = DexpinvMode::ClosedForm;
  int workers = 1;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;  // measured values behind the verdict
  double seconds = 0.0;
};

inline constexpr int kCriterionCount = 11;

CriterionResult run_criterion(int id, const Options& options);
// Runs criteria 1..11 in order, calling `report` after each one.
std::vector<CriterionResult> run_all(const Options& options,
                                     const std::function<void(const CriterionResult&)>& report = {});

// "PASS  3  title  (1.2 s)  detail"
std::string format_result(const CriterionResult& r);

}  // namespace geomdyn::acceptance
