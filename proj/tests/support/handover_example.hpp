#pragma once

// Worked example used across the reasoning tests: two witnesses describe the
// man a bag was handed to, and the extraction step reports two conflicting
// span pairs whose quotes are verbatim substrings of the answers.

namespace handover {

inline constexpr const char* kQuestion =
    "Describe the man to whom the bag was handed over to.";

inline constexpr const char* kWitnessA =
    "Yeah, he's wearing a shirt, and he's a fat guy. He's a long-haired man "
    "standing in the field, and it's a dark night. He was waiting there "
    "patiently smoking a cigarette near a trash can.";

inline constexpr const char* kWitnessB =
    "So the man was middle aged and he has some beard, and he was wearing a "
    "green jacket. And he was standing there smoking. And yeah, that's what I "
    "remember. So it was a random spot near a trash can. And as he was "
    "waiting there, he was quite frustrated. And he was waiting for quite "
    "some long time as he said that it's been hours waiting. And then he was "
    "so frustrated that he started throwing rocks, and he was kicking his "
    "car's tire. And then for whom he was waiting here, arrived. Date was "
    "never mentioned. But the time was it was a late night? Probably "
    "midnight? Yeah, that's what I remember.";

inline constexpr const char* kExtractionResponse =
    "Contradiction 1: [\"he's wearing a shirt\" from Witness A] contradicts "
    "[\"he was wearing a green jacket\" from Witness B]\n"
    "Contradiction 2: [\"He was waiting there patiently smoking a cigarette "
    "near a trash can\" from Witness A] contradicts [\"he was so frustrated "
    "that he started throwing rocks, and he was kicking his car's tire\" from "
    "Witness B]";

inline constexpr const char* kQuote1A = "he's wearing a shirt";
inline constexpr const char* kQuote1B = "he was wearing a green jacket";
inline constexpr const char* kQuote2A =
    "He was waiting there patiently smoking a cigarette near a trash can";
inline constexpr const char* kQuote2B =
    "he was so frustrated that he started throwing rocks, and he was kicking "
    "his car's tire";

}  // namespace handover
