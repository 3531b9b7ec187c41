#!/usr/bin/env python3
"""Authors the bundled 12-pair fixture corpus.

Gold span offsets are computed here with Python string indexing, which counts
Unicode scalar values, i.e. the same offset convention the toolkit uses.
Re-run only when the fixture content changes:

    python3 make_fixture.py > fixture_corpus.jsonl
"""
import json
import sys

EVENTS = [
    {
        "event_id": "ev-cafe",
        "witnesses": ["w1", "w2"],
        "qa": [
            {
                "q": "What was the man at the counter wearing?",
                "a": "He was wearing a long black coat and a red scarf. I remember the scarf because it was bright.",
                "b": "The man wore a long black coat and a red scarf. It was quite striking.",
                "label": 0,
                "findings": [],
            },
            {
                "q": "What did the man do right after entering the café?",
                "a": "He walked straight to the counter and demanded the cash box. Then he smashed the display case with a hammer.",
                "b": "He lingered by the door for a while, then he quietly slipped behind the counter and picked the lock of the cash box.",
                "label": 1,
                "findings": [
                    (
                        "He walked straight to the counter and demanded the cash box",
                        "He lingered by the door for a while",
                    ),
                    (
                        "he smashed the display case with a hammer",
                        "he quietly slipped behind the counter and picked the lock of the cash box",
                    ),
                ],
            },
            {
                "q": "When did the robbery at the café happen?",
                "a": "It happened just after midnight, maybe ten past twelve.",
                "b": "I’m certain it was early evening, around seven o’clock.",
                "label": 1,
                "findings": [
                    (
                        "just after midnight, maybe ten past twelve",
                        "early evening, around seven o’clock",
                    ),
                ],
            },
            {
                "q": "Where exactly was the café?",
                "a": "The café is on Rue Beaumont, next to the old bookshop.",
                "b": "It’s the café on Rue Beaumont, right next to the old bookshop.",
                "label": 0,
                "findings": [],
            },
            {
                "q": "Did the man carry any weapon?",
                "a": "Yes, he had a small silver pistol in his left hand.",
                "b": "He was not armed at all, his hands were empty the whole time.",
                "label": 1,
                "findings": [
                    (
                        "he had a small silver pistol in his left hand",
                        "He was not armed at all, his hands were empty",
                    ),
                ],
            },
            {
                "q": "Why do you think he targeted this café?",
                "a": "I think he knew the owner kept the week’s earnings in the cash box on Sundays.",
                "b": "No idea, it seemed completely random to me.",
                "label": 0,
                "findings": [],
            },
        ],
    },
    {
        "event_id": "ev-warehouse",
        "witnesses": ["w3", "w4"],
        "qa": [
            {
                "q": "Who was seen near the warehouse before the fire?",
                "a": "It was a young woman with a red \U0001f392 backpack, wearing a green jacket.",
                "b": "A young woman in a green jacket, she had a red \U0001f392 backpack with her.",
                "label": 0,
                "findings": [],
            },
            {
                "q": "What did the woman do when the guard approached?",
                "a": "She dropped the fuel can and ran toward the fence, vaulting over it.",
                "b": "She calmly walked up to the guard and showed him some kind of badge.",
                "label": 1,
                "findings": [
                    (
                        "She dropped the fuel can and ran toward the fence",
                        "She calmly walked up to the guard and showed him some kind of badge",
                    ),
                ],
            },
            {
                "q": "What did she use to start the fire?",
                "a": "She used a can of fuel and a cigarette lighter.",
                "b": "From my window it looked like she used a signal flare, not a lighter.",
                "label": 1,
                "findings": [
                    (
                        "a can of fuel and a cigarette lighter",
                        "a signal flare, not a lighter",
                    ),
                ],
            },
            {
                "q": "When did the fire start?",
                "a": "It started around midnight, just as the Волга sedan drove off.",
                "b": "The fire started around midnight, right after that old Волга sedan left.",
                "label": 0,
                "findings": [],
            },
            {
                "q": "Where was the guard when the fire started?",
                "a": "He was inside the small booth by the north gate.",
                "b": "The guard was doing his rounds on the south side, far from his booth.",
                "label": 1,
                "findings": [
                    (
                        "inside the small booth by the north gate",
                        "doing his rounds on the south side",
                    ),
                ],
            },
            {
                "q": "Why was she near the warehouse at that hour?",
                "a": "Someone said she’d been fired from the depot the week before.",
                "b": "I heard she had worked there once and was let go.",
                "label": 0,
                "findings": [],
            },
        ],
    },
]


def span(host, surface):
    start = host.find(surface)
    assert start >= 0, f"surface not found: {surface!r}"
    return {"start": start, "end": start + len(surface), "surface": surface}


def main():
    records = []
    pair_no = 0
    for event in EVENTS:
        wa, wb = event["witnesses"]
        tid_a = f"{event['event_id']}-{wa}-t"
        tid_b = f"{event['event_id']}-{wb}-t"
        records.append(
            {
                "kind": "testimony",
                "testimony_id": tid_a,
                "event_id": event["event_id"],
                "witness_id": f"{event['event_id']}-{wa}",
                "full_text": "\n".join(qa["a"] for qa in event["qa"]),
                "qa_segments": [{"q": qa["q"], "a": qa["a"]} for qa in event["qa"]],
            }
        )
        records.append(
            {
                "kind": "testimony",
                "testimony_id": tid_b,
                "event_id": event["event_id"],
                "witness_id": f"{event['event_id']}-{wb}",
                "full_text": "\n".join(qa["b"] for qa in event["qa"]),
                "qa_segments": [{"q": qa["q"], "a": qa["b"]} for qa in event["qa"]],
            }
        )
        for qa in event["qa"]:
            pair_no += 1
            findings = [
                {
                    "i": i + 1,
                    "span_a": span(qa["a"], sa),
                    "span_b": span(qa["b"], sb),
                }
                for i, (sa, sb) in enumerate(qa["findings"])
            ]
            records.append(
                {
                    "kind": "pair",
                    "pair_id": f"pair-{pair_no:03d}",
                    "context": qa["q"],
                    "answer_a": {"text": qa["a"], "testimony_id": tid_a},
                    "answer_b": {"text": qa["b"], "testimony_id": tid_b},
                    "gold_label": qa["label"],
                    "gold_findings": findings,
                }
            )
    for record in records:
        sys.stdout.write(json.dumps(record, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
