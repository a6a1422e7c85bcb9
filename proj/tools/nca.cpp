// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

// nca: train, chat with, serve, replay and evaluate the online-learning chatbot.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nca/chat.hpp"
#include "nca/checkpoint.hpp"
#include "nca/corpus.hpp"
#include "nca/eval.hpp"
#include "nca/server.hpp"
#include "nca/session.hpp"
#include "nca/trainer.hpp"

namespace {

using namespace nca;

struct DecodeFlags {
  std::size_t k = 5;
  double lr = kDefaultOnlineLr;
  double lambda_first = 100.0;
  double lambda_rest = 2.0;
  std::size_t max_len = 20;
  std::string ordering = "likelihood";

  void add(CLI::App* app) {
    app->add_option("--k", k, "candidates per turn")->capture_default_str();
    app->add_option("--lr", lr, "online learning rate")->capture_default_str();
    app->add_option("--lambda-first", lambda_first, "diversity penalty at the first position")
        ->capture_default_str();
    app->add_option("--lambda-rest", lambda_rest, "diversity penalty after the first position")
        ->capture_default_str();
    app->add_option("--max-len", max_len, "maximum generated tokens")->capture_default_str();
    app->add_option("--ordering", ordering, "candidate display order")
        ->check(CLI::IsMember({"likelihood", "random"}))
        ->capture_default_str();
  }

  DecodeConfig decode() const {
    DecodeConfig d;
    d.k = k;
    d.lambda_first = lambda_first;
    d.lambda_rest = lambda_rest;
    d.max_len = max_len;
    d.ordering = parse_ordering(ordering);
    return d;
  }

  SessionConfig session(std::uint64_t seed) const {
    SessionConfig cfg{lr, decode(), seed};
    cfg.validate();
    return cfg;
  }
};

std::vector<TextPair> load_pairs(const std::string& path) {
  if (path.empty()) return {};
  return load_corpus(path, corpus_format_for(path)).pairs;
}

int cmd_train(const std::string& phase1, const std::string& phase2, const std::string& out,
              const ModelConfig& shape, std::size_t min_freq, std::size_t max_vocab,
              TwoPhaseConfig cfg, const std::string& ckpt_dir) {
  const auto a = load_pairs(phase1);
  const auto b = load_pairs(phase2);
  std::vector<TextPair> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const Vocab vocab = build_vocab(all, min_freq, max_vocab);

  ModelConfig mc = shape;
  mc.vocab_size = vocab.size();
  const auto init = Seq2SeqParams::random(mc, cfg.seed);
  const auto enc_a = encode_pairs(vocab, a);
  const auto enc_b = encode_pairs(vocab, b);
  if (b.empty()) cfg.epochs_b = 0;
  cfg.corpus_hashes.push_back(file_fingerprint(phase1));
  if (!phase2.empty()) cfg.corpus_hashes.push_back(file_fingerprint(phase2));
  if (!ckpt_dir.empty()) cfg.checkpoint_dir = ckpt_dir;
  cfg.on_epoch = [](int phase, std::size_t epoch, const EpochStats& s) {
    std::cerr << "phase " << phase << " epoch " << epoch << " loss " << s.mean_loss << "\n";
  };
  std::cerr << "vocabulary " << vocab.size() << " tokens, " << enc_a.size() << " + " << enc_b.size()
            << " pairs\n";

  auto result = two_phase(init, vocab, enc_a, enc_b, cfg);
  const bool two = cfg.epochs_b > 0;
  Checkpoint ckpt{vocab, result.final_params, result.final_adam,
                  Provenance{two ? "phase2" : "phase1", two ? cfg.epochs_b : cfg.epochs_a,
                             cfg.corpus_hashes, cfg.seed}};
  save_checkpoint(ckpt, out);
  std::cerr << "wrote " << out << "\n";
  return 0;
}

int cmd_chat(const std::string& ckpt_path, const SessionConfig& cfg, const std::string& log) {
  auto ckpt = load_checkpoint(ckpt_path);
  Session session("chat", std::move(ckpt.params), std::make_shared<const Vocab>(std::move(ckpt.vocab)), cfg);
  if (!log.empty()) session.set_log_path(log);
  run_chat(session, std::cin, std::cout);
  return 0;
}

int cmd_serve(const std::string& ckpt_path, const SessionConfig& cfg, std::string host, int port,
              const std::string& log) {
  if (port < 0) {
    const char* env = std::getenv("NCA_PORT");
    port = env ? std::stoi(env) : 8080;
  }
  ServerOptions opts;
  opts.defaults = cfg;
  if (!log.empty()) opts.log_template = log;
  ApiServer server(opts);
  if (!ckpt_path.empty()) server.set_base(load_checkpoint(ckpt_path));
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}

int cmd_replay(const std::string& ckpt_path, const std::string& log, std::optional<double> lr,
               const std::string& out) {
  auto ckpt = load_checkpoint(ckpt_path);
  const auto records = read_transcript(log);
  auto params = replay(records, ckpt.params, ckpt.vocab, lr);
  std::size_t updates = 0;
  for (const auto& r : records) updates += r.updated() ? 1 : 0;
  std::cerr << "replayed " << updates << " updates from " << records.size() << " records\n";
  if (!out.empty()) {
    Checkpoint result{ckpt.vocab, std::move(params), std::nullopt,
                      Provenance{"online", updates, {file_fingerprint(log)}, ckpt.provenance.seed}};
    save_checkpoint(result, out);
    std::cerr << "wrote " << out << "\n";
  }
  return 0;
}

struct EvalFlags {
  std::string suite;
  std::string data, probes, held_out, transcript, json_out;
  std::vector<double> lrs = {0.0001, 0.001, 0.005, 0.01, 0.05, 0.1};
  std::vector<double> lambdas = {0.0, 0.5, 2.0, 10.0, 100.0};
  std::vector<std::size_t> prefixes;
  std::optional<double> lr_override;
};

int cmd_eval(const std::string& ckpt_path, const EvalFlags& f, const DecodeConfig& decode) {
  const auto ckpt = load_checkpoint(ckpt_path);
  ProbeReport report;
  if (f.suite == "lr") {
    SweepData data{load_pairs(f.data), load_pairs(f.probes), load_pairs(f.held_out)};
    report = lr_sweep(ckpt.params, ckpt.vocab, data, f.lrs, decode);
  } else if (f.suite == "interactions") {
    if (f.transcript.empty()) throw CLI::ValidationError("--transcript is required for the interactions suite");
    const auto records = read_transcript(f.transcript);
    auto prefixes = f.prefixes;
    if (prefixes.empty()) {
      for (std::size_t n = 0; n < records.size(); n += std::max<std::size_t>(1, records.size() / 5)) {
        prefixes.push_back(n);
      }
      prefixes.push_back(records.size());
    }
    report = interaction_sweep(ckpt.params, ckpt.vocab, records, prefixes, load_pairs(f.probes),
                               load_pairs(f.held_out), f.lr_override, decode);
  } else {
    std::vector<std::string> prompts;
    for (const auto& p : load_pairs(f.data)) prompts.push_back(p.prompt);
    if (prompts.empty()) throw CLI::ValidationError("--data is required for the diversity suite");
    report = diversity_sweep(ckpt.params, ckpt.vocab, prompts, f.lambdas, decode);
  }
  std::cout << to_table(report) << "\n" << to_json(report).dump(2) << "\n";
  if (!f.json_out.empty()) std::ofstream(f.json_out) << to_json(report).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online-learning seq2seq chatbot"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;

  // train
  auto* train = app.add_subcommand("train", "two-phase supervised training");
  std::string phase1, phase2, out, ckpt_dir;
  ModelConfig shape;
  std::size_t min_freq = 1, max_vocab = 8000;
  TwoPhaseConfig tp;
  train->add_option("--phase1", phase1, "phase-1 corpus (.jsonl or .tsv)")->required()->check(CLI::ExistingFile);
  train->add_option("--phase2", phase2, "phase-2 corpus")->check(CLI::ExistingFile);
  train->add_option("--out", out, "output checkpoint")->required();
  train->add_option("--ckpt-dir", ckpt_dir, "write a checkpoint after every epoch here");
  train->add_option("--embed-dim", shape.embed_dim)->capture_default_str();
  train->add_option("--hidden-dim", shape.hidden_dim)->capture_default_str();
  train->add_option("--max-len", shape.max_len)->capture_default_str();
  train->add_option("--min-freq", min_freq)->capture_default_str();
  train->add_option("--max-vocab", max_vocab)->capture_default_str();
  train->add_option("--epochs1", tp.epochs_a)->capture_default_str();
  train->add_option("--epochs2", tp.epochs_b)->capture_default_str();
  train->add_option("--lr1", tp.lr_a)->capture_default_str();
  train->add_option("--lr2", tp.lr_b)->capture_default_str();
  train->add_option("--batch", tp.batch_size)->capture_default_str();
  train->add_option("--seed", seed)->capture_default_str();

  // chat / serve share the session flags
  std::string ckpt, log, host = "127.0.0.1";
  int port = -1;
  DecodeFlags chat_flags, serve_flags;
  auto* chat = app.add_subcommand("chat", "terminal online-learning loop");
  chat->add_option("--ckpt", ckpt)->required()->check(CLI::ExistingFile);
  chat->add_option("--log", log, "append interaction records to this JSONL file");
  chat->add_option("--seed", seed)->capture_default_str();
  chat_flags.add(chat);

  auto* serve = app.add_subcommand("serve", "HTTP JSON API");
  serve->add_option("--ckpt", ckpt, "base model; POST /api/checkpoint can load one later")
      ->check(CLI::ExistingFile);
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port, "overrides NCA_PORT (default 8080)");
  serve->add_option("--log", log, "per-session JSONL log template");
  serve->add_option("--seed", seed)->capture_default_str();
  serve_flags.add(serve);

  // replay
  auto* rep = app.add_subcommand("replay", "re-apply a transcript to a checkpoint");
  std::optional<double> replay_lr;
  std::string replay_out;
  rep->add_option("--ckpt", ckpt)->required()->check(CLI::ExistingFile);
  rep->add_option("--log", log, "JSONL transcript")->required()->check(CLI::ExistingFile);
  rep->add_option("--lr", replay_lr, "override every record's learning rate");
  rep->add_option("--out", replay_out, "write the resulting checkpoint");
  rep->add_option("--seed", seed)->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "learning-rate, interaction and diversity sweeps");
  EvalFlags ef;
  DecodeFlags eval_flags;
  ev->add_option("--ckpt", ckpt)->required()->check(CLI::ExistingFile);
  ev->add_option("--suite", ef.suite)->required()->check(CLI::IsMember({"lr", "interactions", "diversity"}));
  ev->add_option("--data", ef.data, "training pairs (lr) or prompts (diversity)")->check(CLI::ExistingFile);
  ev->add_option("--probes", ef.probes, "rephrased probe pairs")->check(CLI::ExistingFile);
  ev->add_option("--held-out", ef.held_out, "held-out pairs for perplexity drift")->check(CLI::ExistingFile);
  ev->add_option("--transcript", ef.transcript, "JSONL transcript (interactions)")->check(CLI::ExistingFile);
  ev->add_option("--lrs", ef.lrs, "learning rates (lr)")->delimiter(',');
  ev->add_option("--lambdas", ef.lambdas, "lambdaFirst values (diversity)")->delimiter(',');
  ev->add_option("--prefixes", ef.prefixes, "transcript prefix sizes (interactions)")->delimiter(',');
  ev->add_option("--lr-override", ef.lr_override, "replay lr (interactions)");
  ev->add_option("--json", ef.json_out, "also write the JSON report here");
  ev->add_option("--seed", seed)->capture_default_str();
  eval_flags.add(ev);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      tp.seed = seed;
      return cmd_train(phase1, phase2, out, shape, min_freq, max_vocab, tp, ckpt_dir);
    }
    if (*chat) return cmd_chat(ckpt, chat_flags.session(seed), log);
    if (*serve) return cmd_serve(ckpt, serve_flags.session(seed), host, port, log);
    if (*rep) return cmd_replay(ckpt, log, replay_lr, replay_out);
    if (*ev) return cmd_eval(ckpt, ef, eval_flags.decode());
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
