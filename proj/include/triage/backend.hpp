#pragma once

// Client side of the line-delimited JSON protocol spoken by external
// classifier backends (fine-tuned transformer models run in a companion
// process).
//
//   -> {"kind":"hello"}
//   <- {"kind":"ready","tasks":["informative",...]}
//   -> {"kind":"predict","id":1,"task":"intent","texts":["...",...]}
//   <- {"kind":"result","id":1,"labels":[["need"],...],"scores":[[0.9,0.1],...]}
//   <- {"kind":"error","id":1,"message":"..."}
//
// Ids strictly increase per connection and responses come back in request
// order. Scores are one per schema label, in task_labels() order.

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/corpus.hpp"
#include "triage/models.hpp"

namespace triage {

/// Where a backend lives: a companion process talked to over its standard
/// streams, or a local TCP endpoint.
///
/// Descriptor syntax: "stdio:<command line>" (split on whitespace, no shell)
/// or "tcp:<host>:<port>".
struct BackendEndpoint {
  enum class Kind { process, tcp };

  Kind kind = Kind::process;
  std::vector<std::string> argv;
  std::string host;
  std::uint16_t port = 0;

  static BackendEndpoint parse(std::string_view descriptor);
  std::string describe() const;
};

struct ExternalBackendRef {
  BackendEndpoint endpoint;
  Task task = Task::informative;
  std::chrono::milliseconds timeout{30000};
};

class LineChannel;

/// One connection to a backend. Connecting performs the handshake.
/// Requests on a connection are serialized; open more clients for parallelism.
class BackendClient {
 public:
  static BackendClient connect(const BackendEndpoint& endpoint,
                               std::chrono::milliseconds timeout = std::chrono::seconds(30));

  BackendClient(BackendClient&&) noexcept;
  BackendClient& operator=(BackendClient&&) noexcept;
  ~BackendClient();

  const std::vector<Task>& tasks() const { return tasks_; }
  bool supports(Task task) const;

  /// Throws BackendError on timeout, I/O failure or an error frame, and
  /// ProtocolError on a malformed or out-of-order response. An empty batch
  /// returns immediately without a round trip.
  std::vector<TaskPrediction> predict(Task task, std::span<const std::string> texts);

  std::chrono::milliseconds timeout() const { return timeout_; }

 private:
  BackendClient(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout);

  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  std::int64_t next_id_ = 1;
  std::vector<Task> tasks_;
};

/// Checks one result frame against the request it answers and converts it.
/// Exposed so the frame rules can be tested without a live backend.
std::vector<TaskPrediction> decode_result(const nlohmann::json& frame, std::int64_t expected_id,
                                          Task task, std::size_t n_texts,
                                          const std::string& raw_line);

std::vector<TaskPrediction> external_predict(BackendClient& client, Task task,
                                             std::span<const std::string> texts);

/// Classifier adapter over a backend connection; sends texts in batches.
class BackendClassifier final : public Classifier {
 public:
  BackendClassifier(std::shared_ptr<BackendClient> client, Task task,
                    std::size_t batch_size = 64);
  Task task() const override { return task_; }
  std::vector<TaskPrediction> predict(std::span<const std::string> texts) override;

 private:
  std::shared_ptr<BackendClient> client_;
  Task task_;
  std::size_t batch_size_;
};

}  // namespace triage
