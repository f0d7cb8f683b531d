#pragma once

#include <optional>
#include <string>
#include <vector>

namespace exhawkes::cli {

// Failures inside a command are reported by exception; main turns them into a JSON error
// on stderr and a nonzero exit code.

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<unsigned long long> seed;
};

struct FitMarksArgs {
  std::string events;
  std::string covariates;
  std::string config;
  std::string out;
  std::optional<int> threshold;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> burn_in;
  std::optional<std::size_t> thin;
  std::optional<unsigned long long> seed;
  std::optional<std::string> body;
  std::optional<std::string> tail;
};

struct SelectMarksArgs {
  std::string events;
  std::string config;
  std::string out;
  std::vector<int> thresholds{1, 2, 3, 5};
};

struct FitIntensityArgs {
  std::string events;
  std::string covariates;
  std::string config;
  std::string out;
  std::optional<unsigned long long> seed;
  std::optional<std::size_t> samples;
  bool resume{false};
};

struct PredictArgs {
  std::string chain;
  std::string events;
  std::string covariates;
  std::string config;  // default: the snapshot in the chain directory
  std::string marks;   // mark chain directory; default: maximum-likelihood fit to the events
  std::string out;
  std::optional<std::string> years;
  std::optional<long> mark_threshold;
  std::optional<std::string> grid;
  std::optional<double> horizon;
  std::optional<std::size_t> time_samples;
};

struct DiagnoseArgs {
  std::string chain;
  std::string out;  // default: <chain>/diagnose
};

struct ExploreArgs {
  std::string events;
  std::string config;
  std::string out;
};

void run_simulate(const SimulateArgs& args);
void run_fit_marks(const FitMarksArgs& args);
void run_select_marks(const SelectMarksArgs& args);
void run_fit_intensity(const FitIntensityArgs& args);
void run_predict(const PredictArgs& args);
void run_diagnose(const DiagnoseArgs& args);
void run_explore(const ExploreArgs& args);

}  // namespace exhawkes::cli
