#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "intend/backend.hpp"
#include "intend/corpus.hpp"
#include "intend/prompting.hpp"

// Seeded generator of desk-scale testimony-pair corpora with planted
// incongruences, following the concealment / fabrication / distortion
// taxonomy. The emitted plant manifest doubles as the oracle for end-to-end
// tests, and the matched mock script replays the whole pipeline offline.

namespace intend::synth {

enum class DeceptionOp { Concealment, Fabrication, Distortion };

std::string_view op_name(DeceptionOp op);
DeceptionOp parse_op_name(std::string_view name);  // throws ConfigError

// One planted manipulation. Contradiction plants (fabrication, distortion)
// carry spans on both sides; concealment carries a span only on the side
// that still states the detail.
struct Plant {
  prompting::SixWAspect aspect = prompting::SixWAspect::Identity;
  DeceptionOp op = DeceptionOp::Distortion;
  std::optional<corpus::SpanRef> span_a;
  std::optional<corpus::SpanRef> span_b;
};

struct PairPlan {
  std::string pair_id;
  int gold_label = 0;
  std::vector<Plant> plants;
};

struct DeclaredStats {
  std::int64_t n_pairs = 0;
  std::int64_t n_incongruent = 0;
  std::int64_t n_non_incongruent = 0;
  std::int64_t n_testimonies = 0;
  std::int64_t n_events = 0;
};

struct PlantManifest {
  std::uint64_t seed = 0;
  int n_pairs = 0;
  double incongruent_fraction = 0.0;
  DeclaredStats declared;
  std::vector<PairPlan> pairs;
};

// Slot-value banks. Data users can extend; missing keys in an override file
// fall back to the built-in banks.
struct WordBanks {
  std::vector<std::string> identity;
  std::vector<std::string> action;
  std::vector<std::string> object;
  std::vector<std::string> timeline;
  std::vector<std::string> location;
  std::vector<std::string> reason;
  std::vector<std::string> openers;
  std::vector<std::string> closers;
  std::vector<std::string> questions;

  static WordBanks defaults();
  // JSON object with any subset of the keys above mapped to string arrays.
  static WordBanks load(const std::filesystem::path& path);
};

struct SynthOutput {
  corpus::Corpus corpus;
  PlantManifest manifest;
  backend::MockScript mock_script;
};

// Deterministic for a fixed seed: same arguments, byte-identical outputs.
// round(incongruent_fraction * n_pairs) pairs carry at least one
// contradiction plant; the rest are non-incongruent (possibly with a
// concealment, which alone never makes a pair incongruent).
SynthOutput generate(int n_pairs, double incongruent_fraction, std::uint64_t seed,
                     const WordBanks& banks = WordBanks::defaults());

void write_manifest(const PlantManifest& manifest, const std::filesystem::path& path);
PlantManifest load_manifest(const std::filesystem::path& path);

}  // namespace intend::synth
