#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "test_util.hpp"
#include "triage/backend.hpp"
#include "triage/error.hpp"

using namespace triage;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

BackendEndpoint stub(const std::string& args) {
  return BackendEndpoint::parse(std::string("stdio:") + STUB_BACKEND_PATH + " " + args);
}

}  // namespace

TEST_SUITE("backend") {
  TEST_CASE("endpoint descriptors") {
    const auto p = BackendEndpoint::parse("stdio:python3 serve.py --model dir");
    CHECK(p.kind == BackendEndpoint::Kind::process);
    CHECK(p.argv == std::vector<std::string>{"python3", "serve.py", "--model", "dir"});
    const auto t = BackendEndpoint::parse("tcp:127.0.0.1:9000");
    CHECK(t.kind == BackendEndpoint::Kind::tcp);
    CHECK(t.port == 9000);
    CHECK_THROWS_AS(BackendEndpoint::parse("tcp:host"), std::invalid_argument);
    CHECK_THROWS_AS(BackendEndpoint::parse("ftp:x"), std::invalid_argument);
    CHECK_THROWS_AS(BackendEndpoint::parse("stdio:"), std::invalid_argument);
  }

  TEST_CASE("echo stub round trip surfaces labels verbatim") {
    auto c = BackendClient::connect(stub("echo"), 5s);
    CHECK(c.tasks().size() == 3);
    const std::vector<std::string> texts{"labels:need,supply", "labels:supply", "nothing"};
    const auto p = c.predict(Task::intent, texts);
    REQUIRE(p.size() == 3);
    CHECK(p[0].labels == LabelMask(0b11));
    CHECK(p[1].labels == LabelMask(0b10));
    CHECK(p[2].labels.empty());
    CHECK(p[0].scores == std::vector<double>{0.9, 0.9});
    const auto again = c.predict(Task::aid, std::vector<std::string>{"labels:wash"});
    CHECK(again[0].labels == LabelMask(0b1000));
  }

  TEST_CASE("empty batch needs no round trip") {
    auto c = BackendClient::connect(stub("malformed"), 5s);
    CHECK(c.predict(Task::informative, {}).empty());
  }

  TEST_CASE("protocol violations") {
    const std::vector<std::string> one{"x"};
    {
      auto c = BackendClient::connect(stub("reorder"), 5s);
      CHECK_THROWS_AS(c.predict(Task::informative, one), ProtocolError);
    }
    {
      auto c = BackendClient::connect(stub("malformed"), 5s);
      try {
        c.predict(Task::informative, one);
        FAIL("expected ProtocolError");
      } catch (const ProtocolError& e) {
        CHECK(e.line() == "this is not json");
      }
    }
    CHECK_THROWS_AS(BackendClient::connect(stub("badready"), 5s), ProtocolError);
  }

  TEST_CASE("error frames, unsupported tasks, timeouts, dead processes") {
    const std::vector<std::string> one{"x"};
    {
      auto c = BackendClient::connect(stub("error"), 5s);
      try {
        c.predict(Task::informative, one);
        FAIL("expected BackendError");
      } catch (const ProtocolError&) {
        FAIL("error frame is not a protocol violation");
      } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("model exploded") != std::string::npos);
      }
    }
    {
      auto c = BackendClient::connect(stub("echo informative"), 5s);
      CHECK(c.supports(Task::informative));
      CHECK_FALSE(c.supports(Task::aid));
      CHECK_THROWS_AS(c.predict(Task::aid, one), BackendError);
    }
    {
      auto c = BackendClient::connect(stub("slow"), 300ms);
      const auto t0 = std::chrono::steady_clock::now();
      CHECK_THROWS_AS(c.predict(Task::informative, one), BackendError);
      CHECK(std::chrono::steady_clock::now() - t0 < 2s);
    }
    {
      auto c = BackendClient::connect(stub("exit"), 5s);
      CHECK_THROWS_AS(c.predict(Task::informative, one), BackendError);
    }
    CHECK_THROWS_AS(BackendClient::connect(BackendEndpoint::parse("stdio:/nonexistent/backend"), 1s), BackendError);
  }

  TEST_CASE("decode_result rules") {
    const std::vector<std::string> one{"x"};
    auto frame = json::parse(R"({"kind":"result","id":4,"labels":[["food"]],"scores":[[0.7,0,0,0.2]]})");
    const auto p = decode_result(frame, 4, Task::aid, 1, frame.dump());
    CHECK(p[0].labels == LabelMask(1));
    CHECK_THROWS_AS(decode_result(frame, 5, Task::aid, 1, ""), ProtocolError);
    CHECK_THROWS_AS(decode_result(frame, 4, Task::aid, 2, ""), ProtocolError);
    CHECK_THROWS_AS(decode_result(frame, 4, Task::intent, 1, ""), ProtocolError);
    frame["scores"][0][1] = 1.5;
    CHECK_THROWS_AS(decode_result(frame, 4, Task::aid, 1, ""), ProtocolError);
    frame["scores"][0] = json::array({0.1});
    CHECK_THROWS_AS(decode_result(frame, 4, Task::aid, 1, ""), ProtocolError);
  }

  TEST_CASE("backend classifier batches and keeps order") {
    auto client = std::make_shared<BackendClient>(BackendClient::connect(stub("echo"), 5s));
    BackendClassifier clf(client, Task::informative, 2);
    std::vector<std::string> texts;
    for (int i = 0; i < 7; ++i) texts.push_back(i % 2 ? "labels:informative" : "no");
    const auto p = clf.predict(texts);
    REQUIRE(p.size() == 7);
    for (int i = 0; i < 7; ++i) CHECK(p[static_cast<std::size_t>(i)].labels.has(0) == (i % 2 == 1));
  }

  TEST_CASE("tcp endpoint") {
    const int srv = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    REQUIRE(::listen(srv, 1) == 0);
    socklen_t len = sizeof addr;
    ::getsockname(srv, reinterpret_cast<sockaddr*>(&addr), &len);
    const int port = ntohs(addr.sin_port);

    std::thread server([srv] {
      const int fd = ::accept(srv, nullptr, nullptr);
      std::string buf;
      auto read_line = [&] {
        char c;
        std::string line;
        while (::read(fd, &c, 1) == 1 && c != '\n') line += c;
        return line;
      };
      auto send = [&](const std::string& s) { (void)!::write(fd, (s + "\n").data(), s.size() + 1); };
      read_line();
      send(R"({"kind":"ready","tasks":["informative"]})");
      const auto req = json::parse(read_line());
      send(json{{"kind", "result"}, {"id", req["id"]}, {"labels", {{"informative"}}}, {"scores", {{0.8}}}}.dump());
      ::close(fd);
    });
    {
      auto c = BackendClient::connect(BackendEndpoint::parse("tcp:127.0.0.1:" + std::to_string(port)), 5s);
      const auto p = c.predict(Task::informative, std::vector<std::string>{"hi"});
      CHECK(p[0].labels.has(0));
      CHECK(p[0].scores[0] == 0.8);
    }
    server.join();
    ::close(srv);
    CHECK_THROWS_AS(BackendClient::connect(BackendEndpoint::parse("tcp:127.0.0.1:" + std::to_string(port)), 1s),
                    BackendError);
  }
}
