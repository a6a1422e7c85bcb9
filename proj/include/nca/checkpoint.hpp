// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nca/adam.hpp"
#include "nca/model.hpp"
#include "nca/vocab.hpp"

namespace nca {

// On-disk layout ("NCA1"):
//   bytes 0..3   magic "NCA1"
//   bytes 4..7   metadata length N, uint32 little-endian
//   next N bytes UTF-8 JSON metadata: format_version, hyperparams, vocab,
//                tensor manifest (name, shape, byte offset, element count),
//                optional adam settings, provenance
//   remainder    float32 little-endian tensor data in manifest order; offsets
//                are relative to the start of this section
//
// Adam moments, when present, follow the parameters in the manifest as
// "adam.m/<name>" and "adam.v/<name>".

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct Provenance {
  std::string phase;  // e.g. "phase1", "phase2", "online"
  std::size_t epochs = 0;
  std::vector<std::string> corpus_hashes;
  std::uint64_t seed = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Checkpoint {
  Vocab vocab;
  Seq2SeqParams params;
  std::optional<AdamState> adam;
  Provenance provenance;
};

enum class CheckpointErrorKind {
  kIo,
  kBadMagic,
  kTruncated,
  kManifestMismatch,
  kHyperparameterMismatch,
};

std::string to_string(CheckpointErrorKind kind);

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& detail)
      : std::runtime_error(to_string(kind) + ": " + detail), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
/// `expected`, when given, must equal the stored hyperparameters.
Checkpoint deserialize_checkpoint(std::string_view bytes,
                                  const std::optional<ModelConfig>& expected = std::nullopt);

/// Writes through a temporary file and renames it into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ModelConfig>& expected = std::nullopt);

}  // namespace nca
