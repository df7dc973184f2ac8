// Scripted backend for protocol tests. Usage: stub_backend MODE [TASK...]
//
//   echo       text "labels:a,b" -> labels {a,b} (scores 0.9/0.1); else none
//   all        every schema label positive
//   none       no labels
//   reorder    answers with id + 1
//   malformed  answers predict with a non-JSON line
//   error      answers predict with an error frame
//   slow       sleeps 3 s before answering predict
//   badready   answers hello with a non-ready frame
//   exit       exits right after the handshake
//
// Tasks default to all three.

#include <chrono>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace {

const std::vector<std::string>& schema(const std::string& task) {
  static const std::vector<std::string> informative{"informative"};
  static const std::vector<std::string> intent{"need", "supply"};
  static const std::vector<std::string> aid{"food", "shelter", "health", "wash"};
  if (task == "intent") return intent;
  if (task == "aid") return aid;
  return informative;
}

json answer(const std::string& mode, const json& req) {
  const auto task = req.at("task").get<std::string>();
  const auto& names = schema(task);
  json labels = json::array(), scores = json::array();
  for (const auto& t : req.at("texts")) {
    const auto text = t.get<std::string>();
    std::vector<std::string> chosen;
    if (mode == "all") chosen = names;
    if (mode == "echo" && text.rfind("labels:", 0) == 0) {
      std::string rest = text.substr(7), cur;
      for (char c : rest + ",") {
        if (c == ',') {
          if (!cur.empty()) chosen.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
    }
    json s = json::array();
    for (const auto& n : names) {
      bool on = false;
      for (const auto& c : chosen) on = on || c == n;
      s.push_back(on ? 0.9 : 0.1);
    }
    labels.push_back(chosen);
    scores.push_back(s);
  }
  return {{"kind", "result"}, {"id", req.at("id")}, {"labels", labels}, {"scores", scores}};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "echo";
  json tasks = json::array();
  for (int i = 2; i < argc; ++i) tasks.push_back(argv[i]);
  if (tasks.empty()) tasks = {"informative", "intent", "aid"};

  std::string line;
  while (std::getline(std::cin, line)) {
    json req;
    try {
      req = json::parse(line);
    } catch (const json::exception&) {
      std::cout << json{{"kind", "error"}, {"message", "bad json"}}.dump() << std::endl;
      continue;
    }
    const auto kind = req.value("kind", std::string());
    if (kind == "hello") {
      if (mode == "badready") {
        std::cout << R"({"kind":"result"})" << std::endl;
        continue;
      }
      std::cout << json{{"kind", "ready"}, {"tasks", tasks}}.dump() << std::endl;
      if (mode == "exit") return 0;
      continue;
    }
    if (kind != "predict") continue;
    if (mode == "malformed") {
      std::cout << "this is not json" << std::endl;
      continue;
    }
    if (mode == "error") {
      std::cout << json{{"kind", "error"}, {"id", req.at("id")}, {"message", "model exploded"}}.dump() << std::endl;
      continue;
    }
    if (mode == "slow") std::this_thread::sleep_for(std::chrono::seconds(3));
    auto out = answer(mode, req);
    if (mode == "reorder") out["id"] = req.at("id").get<long long>() + 1;
    std::cout << out.dump() << std::endl;
  }
  return 0;
}
