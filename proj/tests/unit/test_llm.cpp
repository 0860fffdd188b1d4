#include <atomic>
#include <chrono>
#include <thread>

#include "doctest.h"
#include "expdesign/csv.hpp"
#include "expdesign/error.hpp"
#include "expdesign/llm_backend.hpp"
#include "expdesign/prompt.hpp"
#include "expdesign/response.hpp"
#include "helpers.hpp"
#include "httplib.h"
#include "json.hpp"

using namespace expdesign;
using namespace expdesign::llm;

namespace {

Feedback load_feedback(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  Feedback fb;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split_record(line);
    double score = 0;
    REQUIRE(csv::parse_double(f[1], score));
    fb.add({f[0], score, f[2] == "1"});
  }
  return fb;
}

PromptSpec spec_for(std::string_view key, std::size_t round) {
  const auto* d = find_descriptor(key);
  REQUIRE(d != nullptr);
  PromptSpec s;
  s.domain = d->domain;
  s.round_num = round;
  s.batch_len = d->batch_size;
  s.num_centers = d->num_centers;
  s.func_desc = std::string(d->func_desc);
  s.score_desc = std::string(d->score_desc);
  s.candidate_space_info = std::string(d->candidate_space_info);
  return s;
}

}  // namespace

TEST_CASE("round-1 prompts match the golden files for every dataset") {
  const auto dir = testutil::data_dir() / "golden";
  for (const auto key : {"il2", "ifng", "carnevale", "sanchez", "sanchez-down", "ion-e", "esol", "freesolv"}) {
    CAPTURE(key);
    const auto p = render_prompt(spec_for(key, 1));
    CHECK(p.system == testutil::read_file(dir / (std::string(key) + ".round-1.system.txt")));
    CHECK(p.user == testutil::read_file(dir / (std::string(key) + ".round-1.user.txt")));
  }
}

TEST_CASE("rendered gene prompts reproduce the recorded session") {
  const auto dir = testutil::data_dir() / "trace";
  for (std::size_t round = 1; round <= 5; ++round) {
    CAPTURE(round);
    auto spec = spec_for("il2", round);
    if (round > 1) spec.feedback = load_feedback(dir / ("round-" + std::to_string(round) + ".feedback.csv"));
    const auto p = render_prompt(spec);
    CHECK(p.system == testutil::read_file(dir / ("round-" + std::to_string(round) + ".system.txt")));
    CHECK(p.user == testutil::read_file(dir / ("round-" + std::to_string(round) + ".user.txt")));
  }
}

TEST_CASE("feedback table layout") {
  Feedback fb;
  fb.add({"WDR5", 0.82, true});
  const auto user = render_prompt([&] {
                      auto s = spec_for("il2", 2);
                      s.feedback = fb;
                      return s;
                    }())
                        .user;
  CHECK(user.find("[HITS]\nname  score\nWDR5   0.82\n") != std::string::npos);
  CHECK(render_table(std::vector<FeedbackRecord>{{"A", -0.345, false}, {"LONGNAME", 12.0, false}}) ==
        "    name  score\n       A  -0.34\nLONGNAME  12.00");
  CHECK(render_table({}) == "name  score");
}

TEST_CASE("k hits render as k rows") {
  Feedback fb;
  for (int i = 0; i < 7; ++i) fb.add({"G" + std::to_string(i), 0.1 * i, i % 2 == 0});
  const auto text = render_feedback(fb);
  const auto hits = text.substr(0, text.find("[OTHER RESULTS]"));
  CHECK(std::count(hits.begin(), hits.end(), '\n') == 2 + 4);
}

TEST_CASE("prompt preconditions") {
  auto s = spec_for("il2", 1);
  s.feedback = Feedback{};
  CHECK_THROWS_AS(render_prompt(s), PreconditionError);
  auto z = spec_for("il2", 0);
  CHECK_THROWS_AS(render_prompt(z), PreconditionError);
  auto m = spec_for("esol", 1);
  m.variant = PromptVariant::bda;
  CHECK_THROWS_AS(render_prompt(m), PreconditionError);
  auto c = spec_for("il2", 1);
  c.num_centers = 0;
  CHECK_THROWS_AS(render_prompt(c), PreconditionError);
}

TEST_CASE("render is deterministic") {
  auto s = spec_for("carnevale", 3);
  Feedback fb;
  fb.add({"A", 1.0, true});
  fb.add({"B", -1.0, false});
  s.feedback = fb;
  CHECK(render_prompt(s).user == render_prompt(s).user);
  CHECK(render_prompt(s).system == render_prompt(s).system);
}

TEST_CASE("noexp prompt asks for the solution only") {
  auto s = spec_for("il2", 1);
  s.variant = PromptVariant::llmnn_noexp;
  const auto p = render_prompt(s);
  CHECK(p.user.find("**Reflection:") == std::string::npos);
  CHECK(p.user.find("**Research Plan:") == std::string::npos);
  CHECK(p.user.find("**Solution:") != std::string::npos);
  CHECK(p.user.find("## <Gene 5>") != std::string::npos);
}

TEST_CASE("bda prompt asks for the whole batch") {
  auto s = spec_for("il2", 1);
  s.variant = PromptVariant::bda;
  s.batch_len = 16;
  auto p = render_prompt(s);
  CHECK(p.user.find("16") != std::string::npos);
  CHECK(p.user.find("## <Gene 16>") != std::string::npos);
  CHECK(p.user.find("closest") == std::string::npos);
  s.request_count = 3;
  s.exclude = {"FOO", "BAR"};
  p = render_prompt(s);
  CHECK(p.user.find("## <Gene 3>") != std::string::npos);
  CHECK(p.user.find("FOO, BAR") != std::string::npos);
}

TEST_CASE("parse_solution on the recorded round-1 answer") {
  const auto text = testutil::read_file(testutil::data_dir() / "trace" / "round-1.output.txt");
  const auto r = parse_solution(text, 5);
  CHECK(r.solution == std::vector<std::string>{"ABL1", "HNF4A", "MAPK14", "PAK4", "SMAD2"});
  CHECK_FALSE(r.truncated);
  CHECK_FALSE(r.short_);
  CHECK_FALSE(r.reflection.empty());
  CHECK_FALSE(r.research_plan.empty());
}

TEST_CASE("parse_solution edge cases") {
  CHECK_THROWS_AS(parse_solution("**Reflection: nothing\n## ABL1\n", 5), ParseError);
  CHECK_THROWS_AS(parse_solution("**Solution:\nno names here\n", 5), ParseError);
  const auto seven = parse_solution("**Solution:\n## A\n## B\n## C\n## D\n## E\n## F\n## G\n", 5);
  CHECK(seven.solution == std::vector<std::string>{"A", "B", "C", "D", "E"});
  CHECK(seven.truncated);
  const auto few = parse_solution("**Solution:\n##  A \n## B\n## A\n", 5);
  CHECK(few.solution == std::vector<std::string>{"A", "B"});
  CHECK(few.short_);
  const auto last = parse_solution("**Solution:\n## X\n**Solution:\n## Y\n", 5);
  CHECK(last.solution == std::vector<std::string>{"Y"});
}

TEST_CASE("parse recovers names from a rendered exemplar") {
  std::string answer = "**Reflection: fine\n**Research Plan: go\n**Solution:\n";
  const std::vector<std::string> planted{"CCO", "c1ccccc1", "CC(=O)N", "N#N"};
  for (const auto& n : planted) answer += "## " + n + "\n";
  CHECK(parse_solution(answer, 4).solution == planted);
}

TEST_CASE("scripted backend replays fixtures by round") {
  ScriptedBackend b({{1, "one"}, {3, "three"}});
  CHECK(b.chat({"s", "u", {}, 1}) == "one");
  CHECK(b.chat({"s", "u", {}, 2}) == "one");
  CHECK(b.chat({"s", "u", {}, 4}) == "three");
  CHECK(b.calls() == 3);
  auto f = b.fork();
  CHECK(f.calls() == 0);
  ScriptedBackend late({{2, "two"}});
  CHECK_THROWS_AS(late.chat({"s", "u", {}, 1}), LlmError);

  const auto dir = testutil::scratch("fixtures");
  testutil::write_file(dir / "round-1.txt", "first");
  testutil::write_file(dir / "round-2.txt", "second");
  testutil::write_file(dir / "notes.txt", "ignored");
  auto loaded = ScriptedBackend::from_directory(dir);
  CHECK(loaded.chat({"", "", {}, 2}) == "second");
}

TEST_CASE("retry policy") {
  SUBCASE("first attempt succeeds once") {
    ScriptedBackend b({{1, "**Solution:\n## A\n"}});
    CHECK(chat_with_retry(b, {"s", "u", {}, 1}, {}) == "**Solution:\n## A\n");
    CHECK(b.calls() == 1);
  }
  SUBCASE("two failures then success") {
    CallbackBackend b([](const ChatRequest&, std::size_t i) -> std::string {
      if (i < 2) throw LlmError("flaky", true, 503);
      return "ok";
    });
    RetryPolicy p;
    p.max_attempts = 3;
    CHECK(chat_with_retry(b, {}, p) == "ok");
    CHECK(b.calls() == 3);
  }
  SUBCASE("persistent failure exhausts") {
    CallbackBackend b([](const ChatRequest&, std::size_t) -> std::string { throw LlmError("down", true, 500); });
    RetryPolicy p;
    p.max_attempts = 2;
    CHECK_THROWS_AS(chat_with_retry(b, {}, p), RetryExhaustedError);
    CHECK(b.calls() == 2);
  }
  SUBCASE("unparseable replies consume attempts") {
    CallbackBackend b([](const ChatRequest&, std::size_t i) -> std::string {
      return i == 0 ? "garbage" : "**Solution:\n## A\n";
    });
    const auto text = chat_with_retry(b, {}, {}, [](const std::string& t) { parse_solution(t, 1); });
    CHECK(text == "**Solution:\n## A\n");
    CHECK(b.calls() == 2);
  }
  SUBCASE("non-retryable errors propagate at once") {
    CallbackBackend b([](const ChatRequest&, std::size_t) -> std::string { throw LlmError("bad key", false, 401); });
    try {
      chat_with_retry(b, {}, {});
      FAIL("expected an exception");
    } catch (const RetryExhaustedError&) {
      FAIL("should not be reported as exhaustion");
    } catch (const LlmError& e) {
      CHECK(e.http_status() == 401);
    }
    CHECK(b.calls() == 1);
  }
}

TEST_CASE("http backend against a local server") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  nlohmann::json seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const int n = hits++;
    seen_auth = req.get_header_value("Authorization");
    seen_body = nlohmann::json::parse(req.body);
    if (n == 0) {
      res.status = 503;
      return;
    }
    nlohmann::json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "**Solution:\n## ABL1\n"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  server.Post("/forbidden", [](const httplib::Request&, httplib::Response& res) { res.status = 403; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackendConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.model = "test-model";
  cfg.api_key = "secret";
  cfg.timeout = std::chrono::seconds(5);
  HttpBackend backend(cfg);
  ChatRequest req{"sys", "user", {0.7, 123}, 1};
  CHECK(chat_with_retry(backend, req, {}) == "**Solution:\n## ABL1\n");
  CHECK(hits == 2);
  CHECK(seen_auth == "Bearer secret");
  CHECK(seen_body["model"] == "test-model");
  CHECK(seen_body["max_tokens"] == 123);
  CHECK(seen_body["temperature"] == doctest::Approx(0.7));
  CHECK(seen_body["messages"][0]["role"] == "system");
  CHECK(seen_body["messages"][0]["content"] == "sys");
  CHECK(seen_body["messages"][1]["content"] == "user");

  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/forbidden";
  HttpBackend denied(cfg);
  try {
    denied.chat(req);
    FAIL("expected an exception");
  } catch (const LlmError& e) {
    CHECK_FALSE(e.retryable());
    CHECK(e.http_status() == 403);
  }
  server.stop();
  th.join();
}
