#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/corpus.hpp"
#include "triage/error.hpp"
#include "triage/models.hpp"

namespace triage {

/// 100 * count / denominator rounded half-up to two decimals, computed in
/// integers ("59.48"). A zero denominator gives "0.00".
std::string format_percent(std::size_t count, std::size_t denominator);

struct CountShare {
  std::size_t count = 0;
  std::size_t denominator = 0;

  std::string percent() const { return format_percent(count, denominator); }
};

/// Per-tweet outcome of the cascade. Intent and aid are present only for
/// tweets stage 1 marked informative.
struct TweetTriage {
  std::string id;
  bool informative = false;
  double informative_score = 0.0;
  std::optional<TaskPrediction> intent;
  std::optional<TaskPrediction> aid;
};

struct TriageReport {
  std::size_t total = 0;
  CountShare informative;               // over total
  std::array<CountShare, 2> intent{};   // need, supply; over informative
  CountShare both_intents;              // over informative
  std::array<CountShare, 4> aid{};      // food, shelter, health, wash; over informative
  std::vector<TweetTriage> records;
};

/// Aggregates per-tweet records into a report. Throws std::logic_error if a
/// non-informative record carries downstream predictions.
TriageReport build_report(std::vector<TweetTriage> records);

nlohmann::json to_json(const TriageReport& report);

/// Raised when a stage fails mid-run. `partial` holds the stages that
/// completed (downstream fields of later stages left empty).
class CascadeError : public BackendError {
 public:
  CascadeError(const std::string& stage, const std::string& cause, TriageReport partial)
      : BackendError("cascade stage '" + stage + "' failed: " + cause),
        stage_(stage),
        partial_(std::move(partial)) {}

  const std::string& stage() const { return stage_; }
  const TriageReport& partial() const { return partial_; }

 private:
  std::string stage_;
  TriageReport partial_;
};

/// Stage 1 labels every tweet; stages 2 and 3 see only the informative ones.
/// Classifiers must have tasks informative, intent and aid respectively.
TriageReport run_cascade(std::span<const Tweet> tweets, Classifier& informative,
                         Classifier& intent, Classifier& aid);

/// One row of the routing summary: an aid label and the UN humanitarian
/// cluster it is routed to.
struct ClusterRoute {
  std::string label;
  std::string cluster;
  CountShare share;
};

struct RoutingSummary {
  std::size_t total = 0;
  CountShare informative;
  std::array<CountShare, 2> intent{};
  CountShare both_intents;
  std::vector<ClusterRoute> clusters;
};

RoutingSummary routing_report(const TriageReport& report);
nlohmann::json to_json(const RoutingSummary& summary);
std::string format_table(const RoutingSummary& summary);

}  // namespace triage
