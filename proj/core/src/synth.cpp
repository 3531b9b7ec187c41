#include "intend/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "intend/errors.hpp"
#include "intend/reasoning.hpp"
#include "intend/text.hpp"

namespace intend::synth {

using nlohmann::json;
using prompting::SixWAspect;

std::string_view op_name(DeceptionOp op) {
  switch (op) {
    case DeceptionOp::Concealment: return "concealment";
    case DeceptionOp::Fabrication: return "fabrication";
    case DeceptionOp::Distortion: return "distortion";
  }
  return "distortion";
}

DeceptionOp parse_op_name(std::string_view name) {
  if (name == "concealment") return DeceptionOp::Concealment;
  if (name == "fabrication") return DeceptionOp::Fabrication;
  if (name == "distortion") return DeceptionOp::Distortion;
  throw ConfigError("unknown deception op \"" + std::string(name) + "\"");
}

WordBanks WordBanks::defaults() {
  WordBanks b;
  b.identity = {
      "a tall man in a grey hoodie",
      "a short woman with red hair",
      "a teenage boy in a school uniform",
      "an older gentleman with a walking cane",
      "a bearded courier in a yellow vest",
      "a security guard in a dark uniform",
      "a nurse in pale green scrubs",
      "a delivery driver wearing a flat cap",
  };
  b.action = {
      "forced open the side window",
      "snatched the leather bag from the counter",
      "forged a signature on the ledger",
      "handed over a sealed envelope",
      "shoved the cashier against the shelf",
      "slipped the jewelry into a coat pocket",
      "cut the power to the back office",
      "blocked the doorway with a loaded trolley",
  };
  b.object = {
      "a rusty crowbar",
      "a silver pistol",
      "a counterfeit invoice",
      "a blue canvas backpack",
      "a kitchen knife",
      "a stolen bicycle",
      "a cheap burner phone",
      "a roll of duct tape",
  };
  b.timeline = {
      "just after midnight",
      "around noon",
      "late in the evening",
      "at dawn on a Sunday",
      "during the lunch rush",
      "a few minutes before closing",
      "in the middle of the afternoon",
      "right before the morning shift",
  };
  b.location = {
      "behind the old warehouse",
      "near the bus depot",
      "inside the corner pharmacy",
      "at the parking garage",
      "by the river footbridge",
      "outside the café on Main Street",
      "in the alley behind the bakery",
      "next to the ticket booth",
  };
  b.reason = {
      "to settle an old debt",
      "out of pure jealousy",
      "to cover up an earlier theft",
      "for the insurance money",
      "to scare off a new tenant",
      "because of a gang rivalry",
      "to impress an accomplice",
      "out of sheer desperation",
  };
  b.openers = {
      "Well, let me think back.",
      "Okay, here is what I remember.",
      "So, it went like this.",
      "Right, I will tell you what I saw.",
  };
  b.closers = {
      "That is everything I can recall.",
      "That is all I remember for now.",
      "Nothing else comes to mind.",
      "I am certain about what I told you.",
  };
  b.questions = {
      "Describe the person you saw at the scene.",
      "What exactly did the suspect do?",
      "What was the suspect carrying at the time?",
      "When did all of this happen?",
      "Where did the incident take place?",
      "Why do you think they did it?",
      "Walk me through everything you remember about the incident.",
      "Is there anything else about the scene that you remember clearly?",
  };
  return b;
}

WordBanks WordBanks::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word bank file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": malformed word bank JSON: " + e.what());
  }
  WordBanks b = defaults();
  const auto fill = [&](const char* key, std::vector<std::string>& slot) {
    if (const auto it = j.find(key); it != j.end()) {
      slot = it->get<std::vector<std::string>>();
      if (slot.empty()) {
        throw DataError(path.string() + ": bank \"" + key + "\" must not be empty");
      }
    }
  };
  fill("identity", b.identity);
  fill("action", b.action);
  fill("object", b.object);
  fill("timeline", b.timeline);
  fill("location", b.location);
  fill("reason", b.reason);
  fill("openers", b.openers);
  fill("closers", b.closers);
  fill("questions", b.questions);
  return b;
}

namespace {

constexpr int kPairsPerEvent = 3;

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine() % n); }
  bool coin() { return (engine() & 1) != 0; }
};

// Same scheme as split_corpus: stdlib shuffles draw in an
// implementation-defined order, so roll our own.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(v[i - 1], v[j]);
  }
}

std::int64_t round_half_away(double x) {
  return static_cast<std::int64_t>(x >= 0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

std::string zero_pad(int value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

const std::vector<std::string>& bank_for(const WordBanks& banks, SixWAspect aspect) {
  switch (aspect) {
    case SixWAspect::Identity: return banks.identity;
    case SixWAspect::Action: return banks.action;
    case SixWAspect::Object: return banks.object;
    case SixWAspect::Timeline: return banks.timeline;
    case SixWAspect::Location: return banks.location;
    case SixWAspect::Reason: return banks.reason;
  }
  return banks.identity;
}

std::string aspect_title(SixWAspect aspect) {
  std::string name(prompting::aspect_name(aspect));
  name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
  return name;
}

std::string assertion_sentence(SixWAspect aspect, bool side_b, const std::string& value) {
  switch (aspect) {
    case SixWAspect::Identity:
      return side_b ? "From where I stood, the person was " + value + "."
                    : "The person I saw was " + value + ".";
    case SixWAspect::Action:
      return side_b ? "I clearly remember that the suspect " + value + "."
                    : "I watched as the suspect " + value + ".";
    case SixWAspect::Object:
      return side_b ? "In the suspect's hands I noticed " + value + "."
                    : "The suspect was holding " + value + " the whole time.";
    case SixWAspect::Timeline:
      return side_b ? "As far as I recall, it happened " + value + "."
                    : "It all happened " + value + ".";
    case SixWAspect::Location:
      return side_b ? "The whole thing unfolded " + value + "."
                    : "Everything took place " + value + ".";
    case SixWAspect::Reason:
      return side_b ? "If you ask me, they did it " + value + "."
                    : "I believe they did it " + value + ".";
  }
  return value;
}

std::string denial_sentence(SixWAspect aspect) {
  switch (aspect) {
    case SixWAspect::Identity:
      return "To be clear, no such person was there at all.";
    case SixWAspect::Action:
      return "To be clear, nothing like that ever took place.";
    case SixWAspect::Object:
      return "To be clear, they were not holding anything like that.";
    case SixWAspect::Timeline:
      return "To be clear, it certainly did not happen at that time.";
    case SixWAspect::Location:
      return "To be clear, it certainly did not happen there.";
    case SixWAspect::Reason:
      return "To be clear, there was no such motive behind any of it.";
  }
  return {};
}

// How one side realizes one aspect.
enum class SlotKind { Assert, Deny, Omit };

struct SlotPlanSide {
  SlotKind kind = SlotKind::Assert;
  std::string value;  // for Assert
};

struct SlotPlan {
  SlotPlanSide a;
  SlotPlanSide b;
  std::optional<DeceptionOp> op;  // set when this slot carries a plant
};

struct BuiltAnswer {
  std::string text;
  // Span of each realized aspect sentence (without the trailing period), in
  // codepoint offsets; nullopt for omitted aspects.
  std::array<std::optional<corpus::SpanRef>, 6> sentence_spans;
};

BuiltAnswer build_answer(const std::array<SlotPlan, 6>& slots, bool side_b,
                         const std::string& opener, const std::string& closer) {
  BuiltAnswer out;
  std::string& text = out.text;
  std::size_t cp_len = text::cp_length(opener);
  text = opener;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const SlotPlanSide& side = side_b ? slots[s].b : slots[s].a;
    if (side.kind == SlotKind::Omit) continue;
    const auto aspect = prompting::kAspects[s];
    const std::string sentence = side.kind == SlotKind::Deny
                                     ? denial_sentence(aspect)
                                     : assertion_sentence(aspect, side_b, side.value);
    text += " ";
    cp_len += 1;
    const std::size_t begin = cp_len;
    text += sentence;
    cp_len += text::cp_length(sentence);
    corpus::SpanRef span;
    span.start = static_cast<std::int64_t>(begin);
    span.end = static_cast<std::int64_t>(cp_len - 1);  // drop trailing period
    span.surface = sentence.substr(0, sentence.size() - 1);
    out.sentence_spans[s] = std::move(span);
  }
  text += " ";
  text += closer;
  return out;
}

}  // namespace

SynthOutput generate(int n_pairs, double incongruent_fraction, std::uint64_t seed,
                     const WordBanks& banks) {
  if (n_pairs < 1) throw ConfigError("n_pairs must be at least 1");
  if (!(incongruent_fraction >= 0.0 && incongruent_fraction <= 1.0)) {
    throw ConfigError("incongruent_fraction must lie in [0,1]");
  }

  Rng rng(seed);
  const auto n = static_cast<std::size_t>(n_pairs);
  const auto n_incongruent = static_cast<std::size_t>(
      round_half_away(incongruent_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle(order, rng);
  std::vector<bool> incongruent(n, false);
  for (std::size_t k = 0; k < n_incongruent; ++k) incongruent[order[k]] = true;

  const int n_events = (n_pairs + kPairsPerEvent - 1) / kPairsPerEvent;

  SynthOutput out;
  out.manifest.seed = seed;
  out.manifest.n_pairs = n_pairs;
  out.manifest.incongruent_fraction = incongruent_fraction;
  out.manifest.declared = {static_cast<std::int64_t>(n),
                           static_cast<std::int64_t>(n_incongruent),
                           static_cast<std::int64_t>(n - n_incongruent),
                           static_cast<std::int64_t>(2 * n_events),
                           static_cast<std::int64_t>(n_events)};

  struct EventAccumulator {
    std::vector<corpus::QaSegment> qa_a;
    std::vector<corpus::QaSegment> qa_b;
  };

  for (int ev = 0; ev < n_events; ++ev) {
    const std::string event_id = "ev-" + zero_pad(ev + 1, 3);
    const std::string tid_a = event_id + "-w1-t";
    const std::string tid_b = event_id + "-w2-t";
    EventAccumulator acc;

    const int first_pair = ev * kPairsPerEvent;
    const int last_pair = std::min(n_pairs, first_pair + kPairsPerEvent);
    for (int pi = first_pair; pi < last_pair; ++pi) {
      const std::string pair_id = "pair-" + zero_pad(pi + 1, 4);
      const std::string& question = banks.questions[rng.below(banks.questions.size())];

      // Base facts, one value per aspect, then the deception plan.
      std::array<SlotPlan, 6> slots;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        const auto& bank = bank_for(banks, prompting::kAspects[s]);
        const std::string value = bank[rng.below(bank.size())];
        slots[s].a = {SlotKind::Assert, value};
        slots[s].b = {SlotKind::Assert, value};
      }

      std::vector<std::size_t> aspect_order = {0, 1, 2, 3, 4, 5};
      shuffle(aspect_order, rng);
      std::size_t next_aspect = 0;

      if (incongruent[static_cast<std::size_t>(pi)]) {
        const std::size_t n_contradictions = 1 + rng.below(2);
        for (std::size_t c = 0; c < n_contradictions; ++c) {
          const std::size_t s = aspect_order[next_aspect++];
          const auto& bank = bank_for(banks, prompting::kAspects[s]);
          const bool deceiver_is_b = rng.coin();
          if (rng.coin()) {
            // Distortion: the deceiving side alters the slot value.
            std::size_t alt = rng.below(bank.size());
            if (bank[alt] == slots[s].a.value) alt = (alt + 1) % bank.size();
            (deceiver_is_b ? slots[s].b : slots[s].a).value = bank[alt];
            slots[s].op = DeceptionOp::Distortion;
          } else {
            // Fabrication: the deceiving side invents the detail, the honest
            // side explicitly denies it.
            (deceiver_is_b ? slots[s].a : slots[s].b).kind = SlotKind::Deny;
            slots[s].op = DeceptionOp::Fabrication;
          }
        }
      }
      // Concealment never flips the gold label; plant one occasionally on
      // both label classes.
      if (rng.below(3) == 0 && next_aspect < aspect_order.size()) {
        const std::size_t s = aspect_order[next_aspect++];
        (rng.coin() ? slots[s].b : slots[s].a).kind = SlotKind::Omit;
        slots[s].op = DeceptionOp::Concealment;
      }

      const std::string& opener_a = banks.openers[rng.below(banks.openers.size())];
      const std::string& closer_a = banks.closers[rng.below(banks.closers.size())];
      const std::string& opener_b = banks.openers[rng.below(banks.openers.size())];
      const std::string& closer_b = banks.closers[rng.below(banks.closers.size())];
      const BuiltAnswer answer_a = build_answer(slots, false, opener_a, closer_a);
      const BuiltAnswer answer_b = build_answer(slots, true, opener_b, closer_b);

      corpus::ContextPair pair;
      pair.pair_id = pair_id;
      pair.context = question;
      pair.answer_a = {answer_a.text, tid_a};
      pair.answer_b = {answer_b.text, tid_b};
      pair.gold_label = incongruent[static_cast<std::size_t>(pi)] ? 1 : 0;

      PairPlan plan;
      plan.pair_id = pair_id;
      plan.gold_label = *pair.gold_label;

      int finding_index = 0;
      std::vector<reasoning::RawContradiction> raw_contradictions;
      std::string hop1;
      std::string hop2;
      std::array<prompting::MaskLabel, 6> labels;
      labels.fill(prompting::MaskLabel::AgreesWith);

      for (std::size_t s = 0; s < slots.size(); ++s) {
        const auto aspect = prompting::kAspects[s];
        const auto& span_a = answer_a.sentence_spans[s];
        const auto& span_b = answer_b.sentence_spans[s];
        if (!hop1.empty()) hop1 += "\n";
        hop1 += aspect_title(aspect) + ": ";
        if (!slots[s].op.has_value()) {
          hop1 += "Both accounts mention " + slots[s].a.value + ".";
          continue;
        }
        switch (*slots[s].op) {
          case DeceptionOp::Concealment: {
            labels[s] = prompting::MaskLabel::AbsentFrom;
            const bool omitted_b = slots[s].b.kind == SlotKind::Omit;
            hop1 += omitted_b ? "Account A mentions " + slots[s].a.value +
                                    ". Account B does not mention it."
                              : "Account B mentions " + slots[s].b.value +
                                    ". Account A does not mention it.";
            Plant plant;
            plant.aspect = aspect;
            plant.op = DeceptionOp::Concealment;
            plant.span_a = span_a;
            plant.span_b = span_b;
            plan.plants.push_back(std::move(plant));
            break;
          }
          case DeceptionOp::Distortion:
          case DeceptionOp::Fabrication: {
            labels[s] = prompting::MaskLabel::Contradict;
            if (*slots[s].op == DeceptionOp::Distortion) {
              hop1 += "Account A mentions " + slots[s].a.value +
                      ". Account B mentions " + slots[s].b.value + ".";
            } else {
              const bool denier_is_b = slots[s].b.kind == SlotKind::Deny;
              hop1 += denier_is_b ? "Account A mentions " + slots[s].a.value +
                                        ". Account B denies any such detail."
                                  : "Account B mentions " + slots[s].b.value +
                                        ". Account A denies any such detail.";
            }
            Plant plant;
            plant.aspect = aspect;
            plant.op = *slots[s].op;
            plant.span_a = span_a;
            plant.span_b = span_b;

            reasoning::RawContradiction raw;
            raw.index = ++finding_index;
            raw.quote_a = span_a->surface;
            raw.quote_b = span_b->surface;
            raw.relation_word = "contradicts";
            raw_contradictions.push_back(std::move(raw));

            if (!hop2.empty()) hop2 += "\n";
            hop2 += aspect_title(aspect) + ": Account A states \"" +
                    span_a->surface + "\" while Account B states \"" +
                    span_b->surface +
                    "\". Potential Conflict: the two descriptions cannot both "
                    "be true.";

            corpus::GoldFinding gold;
            gold.index = raw_contradictions.back().index;
            gold.span_a = *span_a;
            gold.span_b = *span_b;
            pair.gold_findings.push_back(std::move(gold));
            plan.plants.push_back(std::move(plant));
            break;
          }
        }
      }

      // Scripted responses, one rule per template.
      const auto add_rule = [&](prompting::TemplateId id, std::string response) {
        backend::MockRule rule;
        rule.template_name = std::string(prompting::template_name(id));
        rule.pair_id = pair_id;
        rule.response = std::move(response);
        out.mock_script.rules.push_back(std::move(rule));
      };

      std::string sixw_response;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        if (!sixw_response.empty()) sixw_response += "\n";
        sixw_response += prompting::sixw_statement(
            prompting::kAspects[s], prompting::label_canonical(labels[s]));
      }
      add_rule(prompting::TemplateId::SixW, sixw_response);

      const bool positive = *pair.gold_label == 1;
      add_rule(prompting::TemplateId::QuestionPrompt,
               positive ? "Yes, there is a direct contradiction between the "
                          "statements made by Witness A and Witness B."
                        : "No, there is no direct contradiction between the "
                          "statements made by Witness A and Witness B.");
      add_rule(prompting::TemplateId::RegularPrompt, positive ? "yes" : "no");
      add_rule(prompting::TemplateId::Hop1, hop1);
      add_rule(prompting::TemplateId::Hop2,
               positive ? hop2 : "No conflict detected");
      add_rule(prompting::TemplateId::Hop3,
               positive ? reasoning::format_contradictions(raw_contradictions)
                        : "No conflict detected");

      acc.qa_a.push_back({question, answer_a.text});
      acc.qa_b.push_back({question, answer_b.text});
      out.corpus.pairs.push_back(std::move(pair));
      out.manifest.pairs.push_back(std::move(plan));
    }

    const auto join_answers = [](const std::vector<corpus::QaSegment>& segs) {
      std::string text;
      for (const auto& qa : segs) {
        if (!text.empty()) text += "\n";
        text += qa.answer;
      }
      return text;
    };
    corpus::Testimony ta;
    ta.testimony_id = tid_a;
    ta.event_id = event_id;
    ta.witness_id = event_id + "-w1";
    ta.full_text = join_answers(acc.qa_a);
    ta.qa_segments = acc.qa_a;
    corpus::Testimony tb;
    tb.testimony_id = tid_b;
    tb.event_id = event_id;
    tb.witness_id = event_id + "-w2";
    tb.full_text = join_answers(acc.qa_b);
    tb.qa_segments = acc.qa_b;
    out.corpus.testimonies.push_back(std::move(ta));
    out.corpus.testimonies.push_back(std::move(tb));
  }

  corpus::validate_corpus(out.corpus, corpus::SchemaMode::Substring);
  return out;
}

namespace {

json span_json(const std::optional<corpus::SpanRef>& span) {
  if (!span) return nullptr;
  return json{{"start", span->start}, {"end", span->end}, {"surface", span->surface}};
}

std::optional<corpus::SpanRef> span_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  corpus::SpanRef span;
  span.start = j.at("start").get<std::int64_t>();
  span.end = j.at("end").get<std::int64_t>();
  span.surface = j.at("surface").get<std::string>();
  return span;
}

}  // namespace

void write_manifest(const PlantManifest& manifest, const std::filesystem::path& path) {
  json pairs = json::array();
  for (const auto& plan : manifest.pairs) {
    json plants = json::array();
    for (const auto& plant : plan.plants) {
      plants.push_back({{"aspect", std::string(prompting::aspect_name(plant.aspect))},
                        {"op", std::string(op_name(plant.op))},
                        {"span_a", span_json(plant.span_a)},
                        {"span_b", span_json(plant.span_b)}});
    }
    pairs.push_back({{"pair_id", plan.pair_id},
                     {"gold_label", plan.gold_label},
                     {"plants", plants}});
  }
  const json j{{"seed", manifest.seed},
               {"n_pairs", manifest.n_pairs},
               {"incongruent_fraction", manifest.incongruent_fraction},
               {"declared",
                {{"n_pairs", manifest.declared.n_pairs},
                 {"n_incongruent", manifest.declared.n_incongruent},
                 {"n_non_incongruent", manifest.declared.n_non_incongruent},
                 {"n_testimonies", manifest.declared.n_testimonies},
                 {"n_events", manifest.declared.n_events}}},
               {"pairs", pairs}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path.string());
  out << j.dump(2) << "\n";
}

PlantManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": malformed manifest JSON: " + e.what());
  }
  PlantManifest manifest;
  manifest.seed = j.at("seed").get<std::uint64_t>();
  manifest.n_pairs = j.at("n_pairs").get<int>();
  manifest.incongruent_fraction = j.at("incongruent_fraction").get<double>();
  const auto& d = j.at("declared");
  manifest.declared.n_pairs = d.at("n_pairs").get<std::int64_t>();
  manifest.declared.n_incongruent = d.at("n_incongruent").get<std::int64_t>();
  manifest.declared.n_non_incongruent = d.at("n_non_incongruent").get<std::int64_t>();
  manifest.declared.n_testimonies = d.at("n_testimonies").get<std::int64_t>();
  manifest.declared.n_events = d.at("n_events").get<std::int64_t>();
  for (const auto& p : j.at("pairs")) {
    PairPlan plan;
    plan.pair_id = p.at("pair_id").get<std::string>();
    plan.gold_label = p.at("gold_label").get<int>();
    for (const auto& pl : p.at("plants")) {
      Plant plant;
      plant.aspect = prompting::parse_aspect(pl.at("aspect").get<std::string>());
      plant.op = parse_op_name(pl.at("op").get<std::string>());
      plant.span_a = span_from_json(pl.at("span_a"));
      plant.span_b = span_from_json(pl.at("span_b"));
      plan.plants.push_back(std::move(plant));
    }
    manifest.pairs.push_back(std::move(plan));
  }
  return manifest;
}

}  // namespace intend::synth
