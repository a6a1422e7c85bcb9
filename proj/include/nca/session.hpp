// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nca/adam.hpp"
#include "nca/decode.hpp"
#include "nca/model.hpp"
#include "nca/vocab.hpp"

namespace nca {

inline constexpr double kDefaultOnlineLr = 0.001;
inline constexpr double kOneShotPresetLr = 0.005;

struct SessionConfig {
  double lr = kDefaultOnlineLr;
  DecodeConfig decode;
  std::uint64_t seed = 0;  // drives the random display ordering

  void validate() const;
};

nlohmann::json to_json(const SessionConfig& cfg);
/// Applies the recognised keys of `overrides` (k, lr, lambdaFirst,
/// lambdaRest, ordering, maxLen, seed) on top of `base`. Unknown keys or
/// invalid values throw std::invalid_argument.
SessionConfig apply_overrides(SessionConfig base, const nlohmann::json& overrides);

enum class FeedbackType { kSelect, kFreeform, kSkip };

std::string to_string(FeedbackType type);
FeedbackType parse_feedback_type(std::string_view name);

struct Feedback {
  FeedbackType type = FeedbackType::kSkip;
  std::size_t index = 0;  // 1-based display position, for kSelect
  std::string text;       // for kFreeform

  static Feedback select(std::size_t display_index) { return {FeedbackType::kSelect, display_index, {}}; }
  static Feedback freeform(std::string text) { return {FeedbackType::kFreeform, 0, std::move(text)}; }
  static Feedback skip() { return {}; }

  /// Terminal convention: blank line skips, an integer selects, anything
  /// else is a freeform reply.
  static Feedback parse(std::string_view line);
};

struct CandidateRecord {
  std::string text;
  double log_score = 0.0;
};

/// One turn of the online loop, serialized as one JSONL line.
struct InteractionRecord {
  std::string timestamp;
  std::size_t turn = 0;
  std::string user_msg;
  std::vector<CandidateRecord> candidates;      // generation (beam) order
  std::vector<std::size_t> display_permutation;  // 1-based beam shown at each display position
  FeedbackType feedback_type = FeedbackType::kSkip;
  nlohmann::json feedback_value;  // display index, text, or null
  std::string chosen_response;
  double lr = 0.0;
  std::optional<double> loss_after_update;

  bool updated() const { return feedback_type != FeedbackType::kSkip; }
};

nlohmann::json to_json(const InteractionRecord& record);
/// Throws std::invalid_argument describing the first problem found.
InteractionRecord record_from_json(const nlohmann::json& j);
std::string to_jsonl_line(const InteractionRecord& record);

struct DisplayedCandidate {
  std::size_t index;  // 1-based display position
  std::string text;
  double log_score;
};

struct DisplayedTurn {
  std::vector<DisplayedCandidate> candidates;  // in display order
  std::vector<std::size_t> display_order;      // 1-based beam per display position
};

struct UpdateResult {
  std::string chosen_response;
  std::optional<double> loss_after;
  bool updated = false;
};

/// Raised when feedback arrives with no generated turn awaiting it.
class NoPendingTurnError : public std::logic_error {
 public:
  NoPendingTurnError() : std::logic_error("no pending turn awaiting feedback") {}
};

/// Forward + backward of the pair loss and one Adam step. Returns the loss
/// on the pair after the update.
double online_update(Seq2SeqParams& params, AdamState& adam, const TokenSeq& src, const TokenSeq& tgt);

std::string utc_timestamp();

/// One trainer's run of the online loop: generate K candidates, take
/// feedback, update. Not thread-safe; callers serialize access.
class Session {
 public:
  using Clock = std::function<std::string()>;

  Session(std::string id, Seq2SeqParams params, std::shared_ptr<const Vocab> vocab,
          SessionConfig config, Clock clock = utc_timestamp);

  const std::string& id() const { return id_; }
  const SessionConfig& config() const { return config_; }
  /// Takes effect from the next message.
  void set_config(const SessionConfig& config);

  /// Generates and stores the candidates for `text`. A turn still waiting
  /// for feedback is logged as skipped first. Parameters are not touched.
  const DisplayedTurn& user_message(std::string_view text);
  UpdateResult apply_feedback(const Feedback& feedback);
  bool has_pending() const { return pending_.has_value(); }

  /// True iff greedy decoding of `prompt` reproduces `response` exactly.
  bool one_shot_check(std::string_view prompt, std::string_view response) const;

  const std::vector<InteractionRecord>& transcript() const { return transcript_; }
  std::string transcript_jsonl() const;
  /// Every record is also appended to this file as it is produced. Missing
  /// parent directories are created.
  void set_log_path(std::filesystem::path path);

  const Seq2SeqParams& params() const { return params_; }
  const Vocab& vocab() const { return *vocab_; }
  const AdamState& adam() const { return adam_; }
  std::size_t turns() const { return transcript_.size(); }

 private:
  struct Pending {
    std::string user_msg;
    BeamSet beams;
    std::vector<std::string> texts;
    DisplayOrder order;
    DisplayedTurn view;
  };

  void log(InteractionRecord record);
  InteractionRecord base_record(const Pending& p) const;
  std::size_t top_likelihood_beam(const Pending& p) const;

  std::string id_;
  Seq2SeqParams params_;
  std::shared_ptr<const Vocab> vocab_;
  SessionConfig config_;
  Clock clock_;
  AdamState adam_;
  std::optional<Pending> pending_;
  std::vector<InteractionRecord> transcript_;
  std::optional<std::filesystem::path> log_path_;
};

bool one_shot_check(const Seq2SeqParams& params, const Vocab& vocab, std::string_view prompt,
                    std::string_view response);
bool one_shot_check(const Seq2SeqParams& params, const TokenSeq& src, const TokenSeq& tgt);

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a JSONL interaction log. Throws ReplayError naming the 1-based
/// line of the first malformed record.
std::vector<InteractionRecord> read_transcript(const std::filesystem::path& path);
std::vector<InteractionRecord> parse_transcript(std::string_view jsonl);

/// Re-applies every updated record in order, starting from `initial` with a
/// fresh optimizer. Each update uses the record's lr unless `lr_override` is
/// given.
Seq2SeqParams replay(const std::vector<InteractionRecord>& records, const Seq2SeqParams& initial,
                     const Vocab& vocab, std::optional<double> lr_override = std::nullopt);

}  // namespace nca
