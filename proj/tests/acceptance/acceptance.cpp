// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per headline criterion. Exits non-zero
// if any criterion fails. Tolerances and time budgets are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "httplib.h"
#include "nca/chat.hpp"
#include "nca/checkpoint.hpp"
#include "nca/eval.hpp"
#include "nca/server.hpp"
#include "support/dbs_oracle.hpp"
#include "support/fixtures.hpp"
#include "support/reference_model.hpp"

namespace nca {
namespace {

using nlohmann::json;

// Pinned tolerances.
constexpr double kGradRelTol = 1e-3;
constexpr double kAdamTol = 1e-7;
constexpr double kOneShotTarget = 0.9;
constexpr std::size_t kTwoPhaseEpochLimit = 30;
constexpr double kGradBudget = 10.0;
constexpr double kOracleBudget = 5.0;
constexpr double kTwoPhaseBudget = 120.0;
constexpr double kOneShotBudget = 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome gradient_check() {
  const ModelConfig cfg{10, 4, 4, 8};
  const TokenSeq src{4, 9, 6}, tgt{7, 5, 8};
  double worst = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto p = Seq2SeqParams::random(cfg, seed);
    for (std::size_t i = 0; i < p.tensors().size(); ++i) {
      for (auto& x : p.tensors()[i].data()) x *= 6.0f;
    }
    const auto g = pair_loss(p, src, tgt).tape.backward();
    const auto num = testing::ref_numeric_grad(testing::RefParams::from(p), src, tgt, 1e-3);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t k = 0; k < num[i].size(); ++k) {
        worst = std::max(worst, testing::rel_error(g[i][k], num[i][k]));
      }
    }
  }
  return {worst < kGradRelTol, "worst relative error " + fmt("%.2e", worst)};
}

Outcome adam_check() {
  ParamSet theta({{"theta", Tensor({1}, {0.0f})}});
  ParamSet grad({{"theta", Tensor({1}, {1.0f})}});
  AdamState state(theta, AdamConfig{});
  adam_update(theta, grad, state);
  const double got = theta[0][0];
  // m_hat = 1, v_hat = 1: step = lr / (1 + eps).
  const double want = -0.001 / (1.0 + 1e-8);
  return {std::abs(got - want) < kAdamTol, "theta' = " + fmt("%.10f", got)};
}

Outcome oracle_check() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> v_dist(4, 8), k_dist(1, 4), t_dist(1, 4);
  const double lambdas[] = {0.0, 0.3, 1.7, 100.0, 1e6};
  std::uniform_int_distribution<int> l_dist(0, 4);
  std::size_t mismatches = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto V = v_dist(rng), K = k_dist(rng), T = t_dist(rng);
    const double lf = lambdas[l_dist(rng)], lr = lambdas[l_dist(rng)];
    testing::MockScorer mock(1000 + s, V);
    DecodeConfig cfg;
    cfg.k = K;
    cfg.max_len = T;
    cfg.lambda_first = lf;
    cfg.lambda_rest = lr;
    const auto got = hamming_dbs(mock, cfg);
    const auto want = testing::simulate_reference(mock, V, K, T, lf, lr);
    for (std::size_t i = 0; i < K; ++i) {
      if (got.beams[i].tokens != want.r[i] || got.beams[i].log_score != want.score[i]) {
        ++mismatches;
        break;
      }
    }
  }
  return {mismatches == 0, std::to_string(100 - mismatches) + "/100 mock scorers identical"};
}

Outcome dbs_reductions() {
  std::size_t cases = 0, bad = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto params = Seq2SeqParams::random({16, 6, 8, 7}, seed);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<TokenId> tok(4, 15);
    const TokenSeq src{tok(rng), tok(rng), tok(rng)};
    const auto g = greedy(params, src, 7);

    DecodeConfig cfg;
    cfg.max_len = 7;
    cfg.k = 4;
    cfg.lambda_first = 0.0;
    cfg.lambda_rest = 0.0;
    for (const auto& b : hamming_dbs(params, src, cfg).beams) bad += b.tokens != g;

    cfg.lambda_first = 1e6;
    cfg.lambda_rest = 2.0;
    std::set<TokenId> firsts;
    for (const auto& b : hamming_dbs(params, src, cfg).beams) firsts.insert(b.tokens.front());
    bad += firsts.size() != cfg.k;  // V = 16 >= K + 4

    cfg.k = 1;
    bad += hamming_dbs(params, src, cfg).beams[0].tokens != g;
    cases += 3;
  }
  return {bad == 0, std::to_string(cases - bad) + "/" + std::to_string(cases) + " reductions exact"};
}

Outcome two_phase_check() {
  const auto a = load_corpus(testing::data_path("generic.jsonl"), CorpusFormat::kJsonl).pairs;
  const auto b = load_corpus(testing::data_path("stylized.jsonl"), CorpusFormat::kJsonl).pairs;
  const auto h = load_corpus(testing::data_path("stylized_heldout.jsonl"), CorpusFormat::kJsonl).pairs;
  auto all = a;
  all.insert(all.end(), b.begin(), b.end());
  const Vocab vocab = build_vocab(all, 1);
  const auto ea = encode_pairs(vocab, a), eb = encode_pairs(vocab, b), eh = encode_pairs(vocab, h);
  const double threshold = std::log(static_cast<double>(vocab.size())) / 2.0;

  std::size_t wins = 0, fast = 0;
  std::ostringstream detail;
  detail << a.size() << "+" << b.size() << " pairs, V=" << vocab.size() << ", ln(V)/2=" << fmt("%.2f", threshold)
         << ";";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TwoPhaseConfig cfg;
    cfg.epochs_a = kTwoPhaseEpochLimit;
    cfg.epochs_b = 20;
    cfg.lr_a = 0.01;
    cfg.lr_b = 0.01;
    cfg.batch_size = 10;
    cfg.seed = seed;
    const auto r = two_phase(Seq2SeqParams::random({vocab.size(), 64, 64, 20}, seed), vocab, ea, eb, cfg);
    std::size_t below = 0;
    for (std::size_t e = 0; e < r.history_a.size() && !below; ++e) {
      if (r.history_a[e].mean_loss < threshold) below = e + 1;
    }
    const double p1 = perplexity(r.phase1, eh), p2 = perplexity(r.final_params, eh);
    fast += below != 0;
    wins += p2 < p1;
    detail << " seed " << seed << ": below@" << below << " ppl " << fmt("%.1f", p1) << "->" << fmt("%.2f", p2);
  }
  return {wins == 5 && fast == 5, detail.str()};
}

std::vector<TextPair> random_text_pairs(const Vocab& vocab, std::uint64_t seed) {
  std::vector<TextPair> out;
  for (const auto& p : testing::random_pairs(vocab, 20, seed, 3)) {
    out.push_back({vocab.decode(p.src), vocab.decode(p.tgt)});
  }
  return out;
}

Outcome one_shot_learning() {
  const auto toy = testing::toy_model(1);
  const auto pairs = random_text_pairs(*toy.vocab, 2026);
  DecodeConfig decode;
  decode.k = 3;
  decode.max_len = 8;
  const std::vector<double> lrs = {0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.5};
  const auto report = lr_sweep(toy.params, *toy.vocab, SweepData{pairs, {}, {}}, lrs, decode);

  // Smallest lr reaching the target, else the best one.
  std::size_t pick = 0;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (report.rows[i].one_shot_rate > report.rows[pick].one_shot_rate) pick = i;
  }
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (report.rows[i].one_shot_rate >= kOneShotTarget) {
      pick = i;
      break;
    }
  }
  const double lr = report.rows[pick].x;

  std::size_t hits = 0;
  for (const auto& p : pairs) {
    SessionConfig cfg;
    cfg.lr = lr;
    cfg.decode = decode;
    Session s("a", toy.params, toy.vocab, cfg, testing::fixed_clock());
    s.user_message(p.prompt);
    s.apply_feedback(Feedback::freeform(p.response));
    hits += s.one_shot_check(p.prompt, p.response) ? 1 : 0;
  }
  const double rate = static_cast<double>(hits) / static_cast<double>(pairs.size());
  std::ostringstream detail;
  detail << hits << "/20 at lr " << lr << " (sweep:";
  for (const auto& row : report.rows) detail << " " << row.x << "=" << row.one_shot_rate;
  detail << ")";
  return {rate >= kOneShotTarget, detail.str()};
}

Outcome forgetting_check() {
  std::size_t wins = 0;
  std::ostringstream detail;
  DecodeConfig decode;
  decode.k = 3;
  decode.max_len = 8;
  const std::vector<double> lrs = {0.001, 0.1};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto toy = testing::toy_model(seed);
    const SweepData data{random_text_pairs(*toy.vocab, 500 + seed), {}, toy.pairs};
    const auto report = lr_sweep(toy.params, *toy.vocab, data, lrs, decode);
    const double low = report.rows[0].drift(), high = report.rows[1].drift();
    wins += high > low;
    detail << (seed > 1 ? "; " : "") << "seed " << seed << " drift " << fmt("%.3g", low) << " vs "
           << fmt("%.3g", high);
  }
  return {wins == 5, detail.str()};
}

Outcome replay_check() {
  const auto toy = testing::toy_model(3);
  testing::TempDir dir;
  save_checkpoint({*toy.vocab, toy.params, std::nullopt, {"phase1", 40, {}, 3}}, dir / "start.nca");

  SessionConfig cfg;
  cfg.decode.ordering = DisplayOrdering::kRandom;
  cfg.seed = 9;
  Session s("s1", toy.params, toy.vocab, cfg);
  s.set_log_path(dir / "log.jsonl");
  std::mt19937_64 rng(4);
  for (std::size_t t = 0; t < 30; ++t) {
    const auto& p = toy.pairs[t % toy.pairs.size()];
    s.user_message(p.prompt);
    switch (rng() % 4) {
      case 0: s.apply_feedback(Feedback::select(1 + rng() % 5)); break;
      case 1: s.apply_feedback(Feedback::freeform(toy.pairs[rng() % toy.pairs.size()].response)); break;
      case 2: s.apply_feedback(Feedback::skip()); break;
      default: {
        auto c = s.config();
        c.lr = t % 2 ? 0.005 : 0.001;
        s.set_config(c);
        s.apply_feedback(Feedback::select(1));
      }
    }
  }
  const auto start = load_checkpoint(dir / "start.nca");
  const auto replayed = replay(read_transcript(dir / "log.jsonl"), start.params, start.vocab);
  const bool same = bitwise_equal(replayed.tensors(), s.params().tensors());
  return {same, std::to_string(s.turns()) + " turns replayed, params " + (same ? "bitwise equal" : "differ")};
}

Outcome checkpoint_check() {
  const auto toy = testing::toy_model(5);
  const Checkpoint ckpt{*toy.vocab, toy.params, std::nullopt, {"phase1", 40, {}, 5}};
  testing::TempDir dir;
  save_checkpoint(ckpt, dir / "m.nca");
  const auto back = load_checkpoint(dir / "m.nca");
  bool ok = bitwise_equal(back.params.tensors(), ckpt.params.tensors());
  for (const auto& p : toy.pairs) {
    const auto src = toy.vocab->encode(p.prompt);
    ok = ok && greedy(back.params, src, 8) == greedy(ckpt.params, src, 8);
  }

  const auto bytes = serialize_checkpoint(ckpt);
  auto kind = [](const std::string& b) -> int {
    try {
      deserialize_checkpoint(b);
    } catch (const CheckpointError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  std::string magic = bytes;
  magic[1] = 'X';
  const std::set<int> kinds = {kind(magic), kind(bytes.substr(0, bytes.size() - 10)), kind(bytes + "tail")};
  const bool distinct = kinds.size() == 3 && !kinds.count(-1);
  return {ok && distinct, std::string(ok ? "round-trip bitwise, greedy identical" : "round-trip differs") + "; " +
                              std::to_string(kinds.size()) + " distinct error kinds"};
}

Outcome api_check() {
  const auto toy = testing::toy_model(7);
  std::vector<std::string> failures;
  auto expect = [&](bool cond, const std::string& what) {
    if (!cond) failures.push_back(what);
  };

  ServerOptions opts;
  opts.clock = testing::fixed_clock();
  ApiServer empty(opts);
  const int empty_port = empty.start("127.0.0.1", 0);
  httplib::Client ce("127.0.0.1", empty_port);
  auto r0 = ce.Post("/api/session", "{}", "application/json");
  expect(r0 && r0->status == 409 && json::parse(r0->body)["code"] == "conflict", "409 without model");
  empty.stop();

  ApiServer server(opts);
  server.set_base({*toy.vocab, toy.params, std::nullopt, {}});
  const int port = server.start("127.0.0.1", 0);
  httplib::Client c("127.0.0.1", port);
  auto call = [&](const std::string& method, const std::string& path, const json& body) {
    httplib::Result r = method == "GET"     ? c.Get(path)
                        : method == "PATCH" ? c.Patch(path, body.dump(), "application/json")
                                            : c.Post(path, body.dump(), "application/json");
    if (!r) return std::pair<int, json>{0, json()};
    return std::pair<int, json>{r->status, json::parse(r->body, nullptr, false)};
  };
  auto is_error = [](const std::pair<int, json>& r, int status, const std::string& code) {
    return r.first == status && r.second.is_object() && r.second.size() == 2 && r.second["code"] == code &&
           r.second["message"].is_string();
  };

  SessionConfig cfg;
  cfg.seed = 11;
  cfg.decode.ordering = DisplayOrdering::kRandom;
  const auto created = call("POST", "/api/session", to_json(cfg));
  expect(created.first == 200 && created.second["sessionId"] == "s1" && created.second["config"] == to_json(cfg),
         "create session");
  const std::string base = "/api/session/s1";
  const auto msg = call("POST", base + "/message", {{"text", "red boat fast"}});
  expect(msg.first == 200 && msg.second["candidates"].size() == 5 && msg.second["displayOrder"].size() == 5 &&
             msg.second["candidates"][0].contains("logScore"),
         "message");
  const auto sel = call("POST", base + "/feedback", {{"select", 2}});
  expect(sel.first == 200 && sel.second["updated"] == true && sel.second["loss"].is_number() &&
             sel.second["chosenResponse"] == msg.second["candidates"][1]["text"],
         "select feedback");
  expect(is_error(call("POST", base + "/feedback", {{"skip", true}}), 409, "conflict"), "409 no pending turn");
  const auto patched = call("PATCH", base + "/config", {{"lr", 0.005}});
  expect(patched.first == 200 && patched.second["lr"] == 0.005, "patch config");
  call("POST", base + "/message", {{"text", "sun up"}});
  expect(is_error(call("POST", base + "/feedback", {{"select", 9}}), 400, "bad_request"), "400 select range");
  expect(is_error(call("POST", base + "/feedback", json::object()), 400, "bad_request"), "400 empty feedback");
  const auto ff = call("POST", base + "/feedback", {{"text", "go left now"}});
  expect(ff.first == 200 && ff.second["chosenResponse"] == "go left now", "freeform feedback");
  call("POST", base + "/message", {{"text", "cat hill"}});
  const auto sk = call("POST", base + "/feedback", {{"skip", true}});
  expect(sk.first == 200 && sk.second["updated"] == false && !sk.second.contains("loss"), "skip feedback");
  call("POST", base + "/message", {{"text", "red boat fast"}});
  call("POST", base + "/feedback", {{"select", 1}});
  expect(is_error(call("POST", base + "/message", {{"text", " "}}), 400, "bad_request"), "400 empty text");
  expect(is_error(call("POST", "/api/session/s9/message", {{"text", "x"}}), 404, "not_found"), "404 session");
  expect(is_error(call("GET", "/api/unknown", {}), 404, "not_found"), "404 route");
  const auto tr = call("GET", base + "/transcript", {});
  expect(tr.first == 200 && tr.second.is_array() && tr.second.size() == 4 && tr.second[1]["lr"] == 0.005,
         "transcript");
  testing::TempDir dir;
  const auto ck = call("POST", "/api/checkpoint", {{"action", "save"}, {"path", (dir / "s1.nca").string()},
                                                   {"sessionId", "s1"}});
  expect(ck.first == 200 && ck.second["status"] == "ok", "checkpoint save");
  expect(is_error(call("POST", "/api/checkpoint", {{"action", "load"}, {"path", (dir / "none.nca").string()}}), 400,
                  "bad_request"),
         "400 checkpoint load");

  // The same script through the terminal loop.
  Session term("s1", toy.params, toy.vocab, cfg, testing::fixed_clock());
  std::istringstream in("red boat fast\n2\n/lr 0.005\nsun up\n9\ngo left now\ncat hill\n\nred boat fast\n1\n");
  std::ostringstream out;
  run_chat(term, in, out);
  const auto http_jsonl = c.Get(base + "/transcript?format=jsonl");
  expect(http_jsonl && http_jsonl->body == term.transcript_jsonl(), "terminal and HTTP transcripts identical");
  expect(bitwise_equal(load_checkpoint(dir / "s1.nca").params.tensors(), term.params().tensors()),
         "terminal and HTTP params identical");
  server.stop();

  std::string detail = failures.empty() ? "all endpoint shapes match; transcripts identical" : "failed:";
  for (const auto& f : failures) detail += " [" + f + "]";
  return {failures.empty(), detail};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
  double budget_s;  // 0 = unbounded
};

}  // namespace
}  // namespace nca

int main() {
  using namespace nca;
  const std::vector<Criterion> criteria = {
      {"gradient-correctness", gradient_check, kGradBudget},
      {"adam-single-step", adam_check, 0},
      {"dbs-oracle-equivalence", oracle_check, kOracleBudget},
      {"dbs-reduction-properties", dbs_reductions, 0},
      {"two-phase-training", two_phase_check, kTwoPhaseBudget},
      {"one-shot-learning", one_shot_learning, kOneShotBudget},
      {"forgetting-direction", forgetting_check, 0},
      {"replay-determinism", replay_check, 0},
      {"checkpoint-round-trip", checkpoint_check, 0},
      {"api-contract", api_check, 0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over time budget " + fmt("%.0fs", c.budget_s);
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s (%.2fs) %s\n", o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
