#include "intend/prompting.hpp"

#include "intend/errors.hpp"
#include "intend/text.hpp"

namespace intend::prompting {

namespace {

// Template texts. The instruction sentences, the six cloze statements, and
// the label definitions keep the source wording verbatim; role markers and
// separators around them are ours. The two headers around the statement list
// deliberately avoid the literal "[mask]" marker so a rendered prompt
// contains the marker exactly as many times as it has cloze slots.

constexpr std::string_view k6wVersion = "6w.v1";
constexpr std::string_view kQuestionVersion = "question.v1";
constexpr std::string_view kRegularVersion = "regular.v1";
constexpr std::string_view kHop1Version = "hop1.v1";
constexpr std::string_view kHop2Version = "hop2.v1";
constexpr std::string_view kHop3Version = "hop3.v1";
constexpr std::string_view kMerged12Version = "hop2.merged12.v1";
constexpr std::string_view kMerged123Version = "hop3.merged123.v1";

constexpr std::string_view k6wPreamble =
    "Compare and assess the statements of Witness A and Witness B regarding "
    "[specific aspect, e.g., identification, action, object, timeline, "
    "location, motive]. Identify agreements, contradictions, or missing "
    "information between their accounts.\n"
    "Fill in the mask accordingly:";

constexpr std::string_view k6wOptions =
    "mask options are:\n"
    "agrees with: Use when both testimonies provide consistent or additional "
    "details that align with each other.\n"
    "contradict: Use when testimonies directly conflict with each other.\n"
    "is absent from: Use when one testimony does not provide information on a "
    "detail covered by the other.";

constexpr std::string_view kHop1Task =
    "Given the question and answers provided by two testimonies, analyze and "
    "summarize the key points described in each response relative to the "
    "question.";

constexpr std::string_view kHop2Task =
    "Using the summary of the key points described in each response relative "
    "to the question, use common sense and determine if there is a direct "
    "conflict between any details in Accounts A and B. If there is no "
    "conflict, return \"No conflict detected\". If there is a conflict, "
    "explain why the details are inconsistent.";

constexpr std::string_view kHop3Task =
    "Given an explanation, a question and answers provided by two testimonies "
    "you are tasked with extracting and analyzing incongruent segments of "
    "text between Witness A and Witness B using the explanation.";

constexpr std::string_view kMerged12Task =
    "Given the question and answers provided by two testimonies, analyze and "
    "summarize the key points described in each response relative to the "
    "question. Using the summary, use common sense and determine if there is "
    "a direct conflict between any details in Accounts A and B. If there is "
    "no conflict, return \"No conflict detected\". If there is a conflict, "
    "explain why the details are inconsistent.";

constexpr std::string_view kMerged123Task =
    "Given the question and answers provided by two testimonies, analyze and "
    "summarize the key points described in each response relative to the "
    "question. Using the summary, use common sense and determine if there is "
    "a direct conflict between any details in Accounts A and B. If there is "
    "no conflict, return \"No conflict detected\". If there is a conflict, "
    "explain why the details are inconsistent, then you are tasked with "
    "extracting and analyzing incongruent segments of text between Witness A "
    "and Witness B using the explanation.";

std::string escape_markers(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  std::size_t i = 0;
  while (i < value.size()) {
    if (value.compare(i, kMaskToken.size(), kMaskToken) == 0) {
      out += "(mask)";
      i += kMaskToken.size();
    } else {
      out += value[i];
      ++i;
    }
  }
  return out;
}

void require_pair_fields(const corpus::ContextPair& pair) {
  if (text::trim(pair.context).empty()) {
    throw DataError("pair " + pair.pair_id + ": empty context");
  }
  if (text::trim(pair.answer_a.text).empty()) {
    throw DataError("pair " + pair.pair_id + ": empty answer_a");
  }
  if (text::trim(pair.answer_b.text).empty()) {
    throw DataError("pair " + pair.pair_id + ": empty answer_b");
  }
}

std::string triplet_block(const corpus::ContextPair& pair) {
  std::string out;
  out += "Question: " + escape_markers(pair.context) + "\n";
  out += "Witness A: " + escape_markers(pair.answer_a.text) + "\n";
  out += "Witness B: " + escape_markers(pair.answer_b.text);
  return out;
}

PromptBundle assemble(TemplateId id, std::string_view version,
                      std::string_view instruction, std::string_view body,
                      const corpus::ContextPair& pair, const PromptOptions& opts) {
  PromptBundle bundle;
  bundle.template_id = id;
  bundle.template_version = std::string(version);
  bundle.subject_id = pair.pair_id;
  if (opts.use_system_role) {
    bundle.system_text = std::string(instruction);
    bundle.user_text = std::string(body);
  } else {
    bundle.user_text = std::string(instruction);
    if (!body.empty()) {
      bundle.user_text += "\n\n";
      bundle.user_text += body;
    }
  }
  return bundle;
}

}  // namespace

std::string_view aspect_name(SixWAspect aspect) {
  switch (aspect) {
    case SixWAspect::Identity: return "identity";
    case SixWAspect::Action: return "action";
    case SixWAspect::Object: return "object";
    case SixWAspect::Timeline: return "timeline";
    case SixWAspect::Location: return "location";
    case SixWAspect::Reason: return "reason";
  }
  return "identity";
}

SixWAspect parse_aspect(std::string_view name) {
  for (const auto aspect : kAspects) {
    if (aspect_name(aspect) == name) return aspect;
  }
  throw ConfigError("unknown aspect \"" + std::string(name) + "\"");
}

std::string_view label_canonical(MaskLabel label) {
  switch (label) {
    case MaskLabel::AgreesWith: return "agrees with";
    case MaskLabel::Contradict: return "contradict";
    case MaskLabel::AbsentFrom: return "is absent from";
  }
  return "agrees with";
}

std::string_view label_short(MaskLabel label) {
  switch (label) {
    case MaskLabel::AgreesWith: return "agrees";
    case MaskLabel::Contradict: return "contradict";
    case MaskLabel::AbsentFrom: return "absent";
  }
  return "agrees";
}

MaskLabel parse_label_short(std::string_view name) {
  if (name == "agrees") return MaskLabel::AgreesWith;
  if (name == "contradict") return MaskLabel::Contradict;
  if (name == "absent") return MaskLabel::AbsentFrom;
  throw ConfigError("unknown mask label \"" + std::string(name) + "\"");
}

std::string_view template_name(TemplateId id) {
  switch (id) {
    case TemplateId::SixW: return "6w";
    case TemplateId::QuestionPrompt: return "question";
    case TemplateId::RegularPrompt: return "regular";
    case TemplateId::Hop1: return "hop1";
    case TemplateId::Hop2: return "hop2";
    case TemplateId::Hop3: return "hop3";
  }
  return "6w";
}

TemplateId parse_template_name(std::string_view name) {
  for (const auto id :
       {TemplateId::SixW, TemplateId::QuestionPrompt, TemplateId::RegularPrompt,
        TemplateId::Hop1, TemplateId::Hop2, TemplateId::Hop3}) {
    if (template_name(id) == name) return id;
  }
  throw ConfigError("unknown template \"" + std::string(name) + "\"");
}

std::string sixw_statement(SixWAspect aspect, std::string_view fill) {
  std::string out = "Witness A's ";
  switch (aspect) {
    case SixWAspect::Identity:
      out += "identification of the person ";
      out += fill;
      out += " Witness B's identification.";
      return out;
    case SixWAspect::Action:
      out += "described action ";
      out += fill;
      out += " Witness B's description.";
      return out;
    case SixWAspect::Object:
      out += "described object ";
      out += fill;
      out += " Witness B's described object.";
      return out;
    case SixWAspect::Timeline:
      out += "reported timeline ";
      out += fill;
      out += " Witness B's reported timeline.";
      return out;
    case SixWAspect::Location:
      out += "reported location ";
      out += fill;
      out += " Witness B's reported location.";
      return out;
    case SixWAspect::Reason:
      out += "reported reason ";
      out += fill;
      out += " Witness B's reported reason.";
      return out;
  }
  return out;
}

PromptBundle build_6w_prompt(const corpus::ContextPair& pair,
                             const PromptOptions& opts) {
  require_pair_fields(pair);
  std::string instruction(k6wPreamble);
  for (const auto aspect : kAspects) {
    instruction += "\n- " + sixw_statement(aspect, kMaskToken);
  }
  instruction += "\n";
  instruction += k6wOptions;
  return assemble(TemplateId::SixW, k6wVersion, instruction, triplet_block(pair),
                  pair, opts);
}

PromptBundle build_question_prompt(const corpus::ContextPair& pair,
                                   const PromptOptions& opts) {
  require_pair_fields(pair);
  std::string body = triplet_block(pair);
  body += "\nIs there a direct contradiction between the statements made by "
          "Witness A and Witness B? ";
  body += kMaskToken;
  body += ".";
  PromptBundle bundle;
  bundle.template_id = TemplateId::QuestionPrompt;
  bundle.template_version = std::string(kQuestionVersion);
  bundle.subject_id = pair.pair_id;
  bundle.user_text = std::move(body);
  (void)opts;  // single-message template: the cloze line is the instruction
  return bundle;
}

PromptBundle build_regular_prompt(const corpus::ContextPair& pair,
                                  const PromptOptions& opts) {
  require_pair_fields(pair);
  std::string body = triplet_block(pair);
  body += "\nA? ";
  body += kMaskToken;
  body += " B.";
  PromptBundle bundle;
  bundle.template_id = TemplateId::RegularPrompt;
  bundle.template_version = std::string(kRegularVersion);
  bundle.subject_id = pair.pair_id;
  bundle.user_text = std::move(body);
  (void)opts;
  return bundle;
}

PromptBundle build_hop_prompt(int hop, const corpus::ContextPair& pair,
                              std::string_view carry, const PromptOptions& opts) {
  require_pair_fields(pair);
  switch (hop) {
    case 1:
      return assemble(TemplateId::Hop1, kHop1Version, kHop1Task,
                      triplet_block(pair), pair, opts);
    case 2: {
      if (text::trim(carry).empty()) {
        throw DataError("pair " + pair.pair_id +
                        ": hop 2 requires the hop-1 summary as carry");
      }
      return assemble(TemplateId::Hop2, kHop2Version, kHop2Task,
                      escape_markers(carry), pair, opts);
    }
    case 3: {
      if (text::trim(carry).empty()) {
        throw DataError("pair " + pair.pair_id +
                        ": hop 3 requires the hop-2 explanation as carry");
      }
      std::string body = triplet_block(pair);
      body += "\nExplanation: " + escape_markers(carry);
      return assemble(TemplateId::Hop3, kHop3Version, kHop3Task, body, pair, opts);
    }
    default:
      throw ConfigError("hop must be 1, 2, or 3, got " + std::to_string(hop));
  }
}

PromptBundle build_merged_hop_prompt(int hop_count, const corpus::ContextPair& pair,
                                     const PromptOptions& opts) {
  require_pair_fields(pair);
  if (hop_count == 2) {
    return assemble(TemplateId::Hop2, kMerged12Version, kMerged12Task,
                    triplet_block(pair), pair, opts);
  }
  if (hop_count == 1) {
    return assemble(TemplateId::Hop3, kMerged123Version, kMerged123Task,
                    triplet_block(pair), pair, opts);
  }
  throw ConfigError("merged prompt exists only for hop counts 1 and 2");
}

std::vector<TemplateInfo> list_templates() {
  return {
      {"6w", std::string(k6wVersion)},
      {"question", std::string(kQuestionVersion)},
      {"regular", std::string(kRegularVersion)},
      {"hop1", std::string(kHop1Version)},
      {"hop2", std::string(kHop2Version)},
      {"hop3", std::string(kHop3Version)},
      {"hop2 (merged 1+2)", std::string(kMerged12Version)},
      {"hop3 (merged 1+2+3)", std::string(kMerged123Version)},
  };
}

}  // namespace intend::prompting
