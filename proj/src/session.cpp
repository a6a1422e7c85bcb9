// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/session.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iterator>

#include "nca/trainer.hpp"

namespace nca {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T get_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

void SessionConfig::validate() const {
  if (!std::isfinite(lr) || lr < 0.0) throw std::invalid_argument("lr must be a finite value >= 0");
  decode.validate();
}

json to_json(const SessionConfig& cfg) {
  return {{"k", cfg.decode.k},
          {"lr", cfg.lr},
          {"lambdaFirst", cfg.decode.lambda_first},
          {"lambdaRest", cfg.decode.lambda_rest},
          {"ordering", to_string(cfg.decode.ordering)},
          {"maxLen", cfg.decode.max_len},
          {"seed", cfg.seed}};
}

SessionConfig apply_overrides(SessionConfig cfg, const json& overrides) {
  if (overrides.is_null()) return cfg;
  if (!overrides.is_object()) throw std::invalid_argument("config must be a JSON object");
  auto number = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw std::invalid_argument("'" + key + "' must be a number");
    return v.get<double>();
  };
  auto count = [](const json& v, const std::string& key) -> std::size_t {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
      throw std::invalid_argument("'" + key + "' must be a positive integer");
    }
    return v.get<std::size_t>();
  };
  for (const auto& [key, value] : overrides.items()) {
    if (key == "k") {
      cfg.decode.k = count(value, key);
    } else if (key == "lr") {
      cfg.lr = number(value, key);
    } else if (key == "lambdaFirst") {
      cfg.decode.lambda_first = number(value, key);
    } else if (key == "lambdaRest") {
      cfg.decode.lambda_rest = number(value, key);
    } else if (key == "maxLen") {
      cfg.decode.max_len = count(value, key);
    } else if (key == "ordering") {
      if (!value.is_string()) throw std::invalid_argument("'ordering' must be a string");
      cfg.decode.ordering = parse_ordering(value.get<std::string>());
    } else if (key == "seed") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0) throw std::invalid_argument("'seed' must be a non-negative integer");
      cfg.seed = value.get<std::uint64_t>();
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string to_string(FeedbackType type) {
  switch (type) {
    case FeedbackType::kSelect: return "select";
    case FeedbackType::kFreeform: return "freeform";
    case FeedbackType::kSkip: return "skip";
  }
  return "skip";
}

FeedbackType parse_feedback_type(std::string_view name) {
  if (name == "select") return FeedbackType::kSelect;
  if (name == "freeform") return FeedbackType::kFreeform;
  if (name == "skip") return FeedbackType::kSkip;
  throw std::invalid_argument("unknown feedback type '" + std::string(name) + "'");
}

Feedback Feedback::parse(std::string_view line) {
  const auto t = trim(line);
  if (t.empty()) return skip();
  if (std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), k);
    if (ec == std::errc() && ptr == t.data() + t.size()) return select(k);
    return select(0);  // out of range either way; rejected downstream
  }
  return freeform(std::string(t));
}

json to_json(const InteractionRecord& r) {
  json candidates = json::array();
  for (const auto& c : r.candidates) candidates.push_back({{"text", c.text}, {"logScore", c.log_score}});
  json j = {{"timestamp", r.timestamp},
            {"turn", r.turn},
            {"userMsg", r.user_msg},
            {"candidates", std::move(candidates)},
            {"displayPermutation", r.display_permutation},
            {"feedbackType", to_string(r.feedback_type)},
            {"feedbackValue", r.feedback_value},
            {"chosenResponse", r.chosen_response},
            {"lr", r.lr}};
  if (r.loss_after_update) j["lossAfterUpdate"] = *r.loss_after_update;
  return j;
}

InteractionRecord record_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  InteractionRecord r;
  r.timestamp = get_field<std::string>(j, "timestamp");
  r.turn = get_field<std::size_t>(j, "turn");
  r.user_msg = get_field<std::string>(j, "userMsg");
  const auto cands = get_field<json>(j, "candidates");
  if (!cands.is_array()) throw std::invalid_argument("field 'candidates' must be an array");
  for (const auto& c : cands) {
    r.candidates.push_back({get_field<std::string>(c, "text"), get_field<double>(c, "logScore")});
  }
  r.display_permutation = get_field<std::vector<std::size_t>>(j, "displayPermutation");
  r.feedback_type = parse_feedback_type(get_field<std::string>(j, "feedbackType"));
  r.feedback_value = j.contains("feedbackValue") ? j.at("feedbackValue") : json(nullptr);
  r.chosen_response = get_field<std::string>(j, "chosenResponse");
  r.lr = get_field<double>(j, "lr");
  if (j.contains("lossAfterUpdate")) r.loss_after_update = get_field<double>(j, "lossAfterUpdate");

  const std::size_t k = r.candidates.size();
  switch (r.feedback_type) {
    case FeedbackType::kSelect: {
      if (!r.feedback_value.is_number_unsigned()) throw std::invalid_argument("select feedback needs an index");
      const auto idx = r.feedback_value.get<std::size_t>();
      if (idx < 1 || idx > k) throw std::invalid_argument("select index out of range 1.." + std::to_string(k));
      break;
    }
    case FeedbackType::kFreeform:
      if (!r.feedback_value.is_string() || trim(r.feedback_value.get<std::string>()).empty()) {
        throw std::invalid_argument("freeform feedback needs non-empty text");
      }
      break;
    case FeedbackType::kSkip:
      break;
  }
  if (r.updated() && trim(r.chosen_response).empty()) {
    throw std::invalid_argument("updated record has an empty chosenResponse");
  }
  return r;
}

std::string to_jsonl_line(const InteractionRecord& record) { return to_json(record).dump() + "\n"; }

double online_update(Seq2SeqParams& params, AdamState& adam, const TokenSeq& src, const TokenSeq& tgt) {
  {
    auto pl = pair_loss(params, src, tgt);
    const auto grads = pl.tape.backward(1.0);
    adam_update(params.tensors(), grads, adam);
  }
  return pair_loss(params, src, tgt).loss;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

Session::Session(std::string id, Seq2SeqParams params, std::shared_ptr<const Vocab> vocab,
                 SessionConfig config, Clock clock)
    : id_(std::move(id)),
      params_(std::move(params)),
      vocab_(std::move(vocab)),
      config_(config),
      clock_(std::move(clock)) {
  if (!vocab_ || vocab_->size() != params_.config().vocab_size) {
    throw std::invalid_argument("session vocabulary does not match the model");
  }
  config_.validate();
  AdamConfig ac;
  ac.lr = config_.lr;
  adam_ = AdamState(params_.tensors(), ac);
}

void Session::set_config(const SessionConfig& config) {
  config.validate();
  config_ = config;
  adam_.config.lr = config.lr;
}

const DisplayedTurn& Session::user_message(std::string_view text) {
  const auto src = vocab_->encode(text);
  if (src.empty()) throw std::invalid_argument("message is empty");
  if (pending_) apply_feedback(Feedback::skip());

  Pending p;
  p.user_msg = std::string(text);
  p.beams = hamming_dbs(params_, src, config_.decode);
  for (const auto& b : p.beams.beams) p.texts.push_back(vocab_->decode(b.tokens));
  p.order = order_for_display(p.beams, config_.decode.ordering,
                              derive_seed(config_.seed, transcript_.size()));
  for (std::size_t pos = 0; pos < p.order.order.size(); ++pos) {
    const auto beam = p.order.order[pos];
    p.view.candidates.push_back({pos + 1, p.texts[beam], p.beams.beams[beam].log_score});
    p.view.display_order.push_back(beam + 1);
  }
  pending_ = std::move(p);
  return pending_->view;
}

std::size_t Session::top_likelihood_beam(const Pending& p) const {
  return order_for_display(p.beams, DisplayOrdering::kLikelihood, 0).order.front();
}

InteractionRecord Session::base_record(const Pending& p) const {
  InteractionRecord r;
  r.timestamp = clock_();
  r.turn = transcript_.size() + 1;
  r.user_msg = p.user_msg;
  for (std::size_t i = 0; i < p.beams.beams.size(); ++i) {
    r.candidates.push_back({p.texts[i], p.beams.beams[i].log_score});
  }
  r.display_permutation = p.view.display_order;
  r.lr = config_.lr;
  return r;
}

UpdateResult Session::apply_feedback(const Feedback& feedback) {
  if (!pending_) throw NoPendingTurnError();
  const Pending& p = *pending_;
  const std::size_t k = p.beams.beams.size();

  InteractionRecord record = base_record(p);
  record.feedback_type = feedback.type;
  switch (feedback.type) {
    case FeedbackType::kSelect:
      if (feedback.index < 1 || feedback.index > k) {
        throw std::invalid_argument("selection " + std::to_string(feedback.index) +
                                    " out of range 1.." + std::to_string(k));
      }
      record.feedback_value = feedback.index;
      record.chosen_response = p.texts[p.order.beam_at(feedback.index - 1)];
      break;
    case FeedbackType::kFreeform:
      if (trim(feedback.text).empty()) throw std::invalid_argument("freeform feedback is empty");
      record.feedback_value = feedback.text;
      record.chosen_response = feedback.text;
      break;
    case FeedbackType::kSkip:
      record.feedback_value = nullptr;
      record.chosen_response = p.texts[top_likelihood_beam(p)];
      break;
  }

  UpdateResult result;
  result.chosen_response = record.chosen_response;
  if (record.updated()) {
    const auto src = vocab_->encode(record.user_msg);
    const auto tgt = vocab_->encode(record.chosen_response);
    const double loss = online_update(params_, adam_, src, tgt);
    record.loss_after_update = loss;
    result.loss_after = loss;
    result.updated = true;
  }
  pending_.reset();
  log(std::move(record));
  return result;
}

void Session::set_log_path(std::filesystem::path path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!std::ofstream(path, std::ios::app | std::ios::binary)) {
    throw std::runtime_error("cannot open log " + path.string() + " for appending");
  }
  log_path_ = std::move(path);
}

void Session::log(InteractionRecord record) {
  if (log_path_) {
    std::ofstream out(*log_path_, std::ios::app | std::ios::binary);
    out << to_jsonl_line(record);
  }
  transcript_.push_back(std::move(record));
}

std::string Session::transcript_jsonl() const {
  std::string out;
  for (const auto& r : transcript_) out += to_jsonl_line(r);
  return out;
}

bool one_shot_check(const Seq2SeqParams& params, const TokenSeq& src, const TokenSeq& tgt) {
  if (src.empty()) return false;
  auto want = clip_target(tgt, params.config().max_len);
  want.push_back(kEos);
  return greedy(params, src, params.config().max_len) == want;
}

bool one_shot_check(const Seq2SeqParams& params, const Vocab& vocab, std::string_view prompt,
                    std::string_view response) {
  return one_shot_check(params, vocab.encode(prompt), vocab.encode(response));
}

bool Session::one_shot_check(std::string_view prompt, std::string_view response) const {
  return nca::one_shot_check(params_, *vocab_, prompt, response);
}

std::vector<InteractionRecord> parse_transcript(std::string_view jsonl) {
  std::vector<InteractionRecord> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    auto end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const auto line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      records.push_back(record_from_json(j));
    } catch (const std::exception& e) {
      throw ReplayError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<InteractionRecord> read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReplayError("cannot read transcript " + path.string());
  const std::string text(std::istreambuf_iterator<char>(in), {});
  return parse_transcript(text);
}

Seq2SeqParams replay(const std::vector<InteractionRecord>& records, const Seq2SeqParams& initial,
                     const Vocab& vocab, std::optional<double> lr_override) {
  Seq2SeqParams params = initial;
  AdamState adam(params.tensors(), AdamConfig{});
  for (const auto& r : records) {
    if (!r.updated()) continue;
    adam.config.lr = lr_override.value_or(r.lr);
    online_update(params, adam, vocab.encode(r.user_msg), vocab.encode(r.chosen_response));
  }
  return params;
}

}  // namespace nca
