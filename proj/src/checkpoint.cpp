// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace nca {
namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'N', 'C', 'A', '1'};

static_assert(sizeof(float) == 4);

void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32_le(std::string_view in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  return v;
}

void append_floats(std::string& out, std::span<const float> data) {
  const auto start = out.size();
  out.resize(start + data.size() * 4);
  if constexpr (std::endian::native == std::endian::little) {
    if (!data.empty()) std::memcpy(out.data() + start, data.data(), data.size() * 4);
  } else {
    for (std::size_t k = 0; k < data.size(); ++k) {
      const auto bits = std::bit_cast<std::uint32_t>(data[k]);
      for (int i = 0; i < 4; ++i) out[start + 4 * k + i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    }
  }
}

void read_floats(std::string_view in, std::span<float> dst) {
  if constexpr (std::endian::native == std::endian::little) {
    if (!dst.empty()) std::memcpy(dst.data(), in.data(), dst.size() * 4);
  } else {
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = std::bit_cast<float>(get_u32_le(in.substr(4 * k)));
  }
}

json hyperparams_json(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size},
          {"embed_dim", c.embed_dim},
          {"hidden_dim", c.hidden_dim},
          {"max_len", c.max_len}};
}

std::string describe(const ModelConfig& c) {
  return "V=" + std::to_string(c.vocab_size) + " E=" + std::to_string(c.embed_dim) +
         " H=" + std::to_string(c.hidden_dim) + " T=" + std::to_string(c.max_len);
}

struct ManifestEntry {
  std::string name;
  const Tensor* tensor;
};

std::vector<ManifestEntry> manifest_of(const Checkpoint& ckpt) {
  std::vector<ManifestEntry> out;
  const auto& p = ckpt.params.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) out.push_back({p.name(i), &p[i]});
  if (ckpt.adam) {
    for (std::size_t i = 0; i < p.size(); ++i) out.push_back({"adam.m/" + p.name(i), &ckpt.adam->m[i]});
    for (std::size_t i = 0; i < p.size(); ++i) out.push_back({"adam.v/" + p.name(i), &ckpt.adam->v[i]});
  }
  return out;
}

[[noreturn]] void fail(CheckpointErrorKind kind, const std::string& detail) {
  throw CheckpointError(kind, detail);
}

}  // namespace

std::string to_string(CheckpointErrorKind kind) {
  switch (kind) {
    case CheckpointErrorKind::kIo: return "io error";
    case CheckpointErrorKind::kBadMagic: return "bad magic";
    case CheckpointErrorKind::kTruncated: return "truncated data";
    case CheckpointErrorKind::kManifestMismatch: return "manifest mismatch";
    case CheckpointErrorKind::kHyperparameterMismatch: return "hyperparameter mismatch";
  }
  return "unknown";
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const auto& cfg = ckpt.params.config();
  if (ckpt.vocab.size() != cfg.vocab_size) {
    throw std::invalid_argument("vocab size " + std::to_string(ckpt.vocab.size()) +
                                " does not match model vocab_size " + std::to_string(cfg.vocab_size));
  }
  json meta;
  meta["format_version"] = kCheckpointFormatVersion;
  meta["hyperparams"] = hyperparams_json(cfg);
  meta["vocab"] = ckpt.vocab.tokens();

  json manifest = json::array();
  std::uint64_t offset = 0;
  const auto entries = manifest_of(ckpt);
  for (const auto& e : entries) {
    manifest.push_back({{"name", e.name},
                        {"shape", e.tensor->shape()},
                        {"offset", offset},
                        {"count", e.tensor->size()}});
    offset += 4 * e.tensor->size();
  }
  meta["tensors"] = std::move(manifest);

  if (ckpt.adam) {
    const auto& a = *ckpt.adam;
    meta["adam"] = {{"t", a.t},
                    {"lr", a.config.lr},
                    {"beta1", a.config.beta1},
                    {"beta2", a.config.beta2},
                    {"eps", a.config.eps},
                    {"clip_norm", a.config.clip_norm}};
  } else {
    meta["adam"] = nullptr;
  }
  meta["provenance"] = {{"phase", ckpt.provenance.phase},
                        {"epochs", ckpt.provenance.epochs},
                        {"corpus_hashes", ckpt.provenance.corpus_hashes},
                        {"seed", ckpt.provenance.seed}};

  const std::string meta_text = meta.dump();
  std::string out(kMagic, 4);
  put_u32_le(out, static_cast<std::uint32_t>(meta_text.size()));
  out += meta_text;
  out.reserve(out.size() + offset);
  for (const auto& e : entries) append_floats(out, e.tensor->data());
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes, const std::optional<ModelConfig>& expected) {
  if (bytes.size() < 4) fail(CheckpointErrorKind::kTruncated, "file shorter than the magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) fail(CheckpointErrorKind::kBadMagic, "expected \"NCA1\"");
  if (bytes.size() < 8) fail(CheckpointErrorKind::kTruncated, "missing metadata length");
  const std::uint32_t meta_len = get_u32_le(bytes.substr(4));
  if (bytes.size() - 8 < meta_len) fail(CheckpointErrorKind::kTruncated, "metadata cut short");

  auto meta = json::parse(bytes.substr(8, meta_len), nullptr, /*allow_exceptions=*/false);
  if (meta.is_discarded() || !meta.is_object()) {
    fail(CheckpointErrorKind::kManifestMismatch, "metadata is not a JSON object");
  }
  const std::string_view data = bytes.substr(8 + meta_len);

  try {
    if (meta.at("format_version").get<std::uint32_t>() != kCheckpointFormatVersion) {
      fail(CheckpointErrorKind::kManifestMismatch, "unsupported format version");
    }
    ModelConfig cfg;
    const auto& hp = meta.at("hyperparams");
    cfg.vocab_size = hp.at("vocab_size").get<std::size_t>();
    cfg.embed_dim = hp.at("embed_dim").get<std::size_t>();
    cfg.hidden_dim = hp.at("hidden_dim").get<std::size_t>();
    cfg.max_len = hp.at("max_len").get<std::size_t>();
    if (expected && !(*expected == cfg)) {
      fail(CheckpointErrorKind::kHyperparameterMismatch,
           "file has " + describe(cfg) + ", expected " + describe(*expected));
    }

    auto words = meta.at("vocab").get<std::vector<std::string>>();
    if (words.size() != cfg.vocab_size || words.size() < kNumSpecials) {
      fail(CheckpointErrorKind::kManifestMismatch, "vocab length disagrees with vocab_size");
    }
    Vocab reference;
    for (std::size_t i = 0; i < kNumSpecials; ++i) {
      if (words[i] != reference.tokens()[i]) {
        fail(CheckpointErrorKind::kManifestMismatch, "special tokens out of place");
      }
    }
    words.erase(words.begin(), words.begin() + kNumSpecials);
    Vocab vocab(words);

    const bool has_adam = !meta.at("adam").is_null();
    ParamSet layout = make_param_layout(cfg);
    std::vector<std::pair<std::string, Tensor*>> slots;
    ParamSet params = layout;
    std::optional<AdamState> adam;
    for (std::size_t i = 0; i < params.size(); ++i) slots.emplace_back(params.name(i), &params[i]);
    if (has_adam) {
      const auto& a = meta.at("adam");
      AdamConfig ac;
      ac.lr = a.at("lr").get<double>();
      ac.beta1 = a.at("beta1").get<double>();
      ac.beta2 = a.at("beta2").get<double>();
      ac.eps = a.at("eps").get<double>();
      ac.clip_norm = a.at("clip_norm").get<double>();
      adam.emplace(layout, ac);
      adam->t = a.at("t").get<std::int64_t>();
      for (std::size_t i = 0; i < params.size(); ++i) slots.emplace_back("adam.m/" + params.name(i), &adam->m[i]);
      for (std::size_t i = 0; i < params.size(); ++i) slots.emplace_back("adam.v/" + params.name(i), &adam->v[i]);
    }

    const auto& manifest = meta.at("tensors");
    if (!manifest.is_array() || manifest.size() != slots.size()) {
      fail(CheckpointErrorKind::kManifestMismatch,
           "expected " + std::to_string(slots.size()) + " tensors in manifest");
    }
    std::uint64_t offset = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& entry = manifest[i];
      auto& [name, tensor] = slots[i];
      const auto entry_name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      const auto count = entry.at("count").get<std::uint64_t>();
      const auto entry_offset = entry.at("offset").get<std::uint64_t>();
      if (entry_name != name || shape != tensor->shape() || count != tensor->size() ||
          entry_offset != offset) {
        fail(CheckpointErrorKind::kManifestMismatch,
             "tensor " + std::to_string(i) + " ('" + entry_name + "' " + shape_string(shape) +
                 ") does not match expected '" + name + "' " + shape_string(tensor->shape()));
      }
      offset += 4 * count;
    }
    if (data.size() < offset) {
      fail(CheckpointErrorKind::kTruncated, "tensor data holds " + std::to_string(data.size()) +
                                                " bytes, manifest needs " + std::to_string(offset));
    }
    if (data.size() > offset) {
      fail(CheckpointErrorKind::kManifestMismatch, "trailing bytes after tensor data");
    }
    offset = 0;
    for (auto& [name, tensor] : slots) {
      read_floats(data.substr(offset), tensor->data());
      offset += 4 * tensor->size();
      if (!tensor->all_finite()) {
        fail(CheckpointErrorKind::kManifestMismatch, "tensor '" + name + "' holds non-finite values");
      }
    }

    Provenance prov;
    const auto& pj = meta.at("provenance");
    prov.phase = pj.at("phase").get<std::string>();
    prov.epochs = pj.at("epochs").get<std::size_t>();
    prov.corpus_hashes = pj.at("corpus_hashes").get<std::vector<std::string>>();
    prov.seed = pj.at("seed").get<std::uint64_t>();

    return Checkpoint{std::move(vocab), Seq2SeqParams(cfg, std::move(params)), std::move(adam),
                      std::move(prov)};
  } catch (const json::exception& e) {
    fail(CheckpointErrorKind::kManifestMismatch, std::string("malformed metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    fail(CheckpointErrorKind::kManifestMismatch, e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(CheckpointErrorKind::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(CheckpointErrorKind::kIo, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(CheckpointErrorKind::kIo, "cannot move checkpoint into " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<ModelConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(CheckpointErrorKind::kIo, "cannot open " + path.string());
  const std::string bytes(std::istreambuf_iterator<char>(in), {});
  return deserialize_checkpoint(bytes, expected);
}

}  // namespace nca
