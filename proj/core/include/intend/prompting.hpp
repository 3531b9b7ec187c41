#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "intend/corpus.hpp"

// Deterministic prompt assembly for the 6W detection prompt, the
// question/regular baseline prompts, and the three reasoning hops. Builders
// are pure functions of (template id, version, inputs): no timestamps, no
// randomness.

namespace intend::prompting {

enum class SixWAspect { Identity, Action, Object, Timeline, Location, Reason };

inline constexpr std::array<SixWAspect, 6> kAspects = {
    SixWAspect::Identity, SixWAspect::Action,   SixWAspect::Object,
    SixWAspect::Timeline, SixWAspect::Location, SixWAspect::Reason,
};

std::string_view aspect_name(SixWAspect aspect);          // "identity", ...
SixWAspect parse_aspect(std::string_view name);           // throws ConfigError

enum class MaskLabel { AgreesWith, Contradict, AbsentFrom };

std::string_view label_canonical(MaskLabel label);  // "agrees with", ...
std::string_view label_short(MaskLabel label);      // "agrees", "contradict", "absent"
MaskLabel parse_label_short(std::string_view name); // throws ConfigError

// One cloze statement of the 6W template, with `fill` in the mask slot, e.g.
// "Witness A's reported timeline [mask] Witness B's reported timeline."
std::string sixw_statement(SixWAspect aspect, std::string_view fill);

enum class TemplateId { SixW, QuestionPrompt, RegularPrompt, Hop1, Hop2, Hop3 };

std::string_view template_name(TemplateId id);  // "6w", "question", ...
TemplateId parse_template_name(std::string_view name);  // throws ConfigError

// The literal cloze slot used by the 6W and baseline templates. Interpolated
// inputs containing this marker are rewritten to "(mask)" so that counting
// the marker in a rendered prompt always yields the template's own count.
inline constexpr std::string_view kMaskToken = "[mask]";

struct PromptBundle {
  std::string system_text;  // empty unless use_system_role is set
  std::string user_text;
  TemplateId template_id = TemplateId::SixW;
  std::string template_version;
  // Identifier of the pair the prompt was built for. Routing metadata for
  // mock scripts and transcripts; not part of the rendered text.
  std::string subject_id;
};

struct PromptOptions {
  // When set, the instruction block is emitted as a system message and the
  // data block as the user message; default is one user message.
  bool use_system_role = false;
};

PromptBundle build_6w_prompt(const corpus::ContextPair& pair,
                             const PromptOptions& opts = {});
PromptBundle build_question_prompt(const corpus::ContextPair& pair,
                                   const PromptOptions& opts = {});
PromptBundle build_regular_prompt(const corpus::ContextPair& pair,
                                  const PromptOptions& opts = {});

// Table-style hop prompts. Hop 1 ignores carry; hop 2 requires the hop-1
// summary as carry; hop 3 requires the hop-2 explanation as carry.
PromptBundle build_hop_prompt(int hop, const corpus::ContextPair& pair,
                              std::string_view carry,
                              const PromptOptions& opts = {});

// Collapsed chains for the 1- and 2-hop configurations. The merged prompts
// concatenate the hop task sentences in order. They reuse the Hop2/Hop3
// template slots (with distinct template versions) so a single mock script
// serves every hop count: the 2-hop reasoning stage answers like hop 2, and
// the 1-hop prompt answers like hop 3.
PromptBundle build_merged_hop_prompt(int hop_count, const corpus::ContextPair& pair,
                                     const PromptOptions& opts = {});

struct TemplateInfo {
  std::string name;
  std::string version;
};

std::vector<TemplateInfo> list_templates();

}  // namespace intend::prompting
