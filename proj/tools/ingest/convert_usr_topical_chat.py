#!/usr/bin/env python3
"""Convert the USR Topical-Chat annotation file into a scoring JSONL dataset.

The input is the released JSON list of contexts, each with `context`,
`fact` and `responses`; every response carries `model`, `response` and
per-annotator score lists. Annotator scores are averaged per dimension.

Column mapping: Natural -> naturalness, Maintains Context -> coherence,
Engaging -> engagingness, Uses Knowledge -> groundedness.
"""
import argparse
import json
import statistics

DIMENSIONS = {
    "naturalness": ("Natural", [1, 3]),
    "coherence": ("Maintains Context", [1, 3]),
    "engagingness": ("Engaging", [1, 3]),
    "groundedness": ("Uses Knowledge", [0, 1]),
}


def score(value):
    if isinstance(value, list):
        return statistics.fmean(float(v) for v in value)
    return float(value)


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--input", required=True, help="tc_usr_data.json")
    p.add_argument("--out", required=True)
    args = p.parse_args()

    with open(args.input, encoding="utf-8") as f:
        contexts = json.load(f)

    count = 0
    with open(args.out, "w", encoding="utf-8") as out:
        header = {"format": "scoring", "version": 1, "scales": {d: s for d, (_, s) in DIMENSIONS.items()}}
        out.write(json.dumps(header) + "\n")
        for c, ctx in enumerate(contexts, start=1):
            for r in ctx["responses"]:
                record = {
                    "item_id": f"c{c:03d}-{r['model']}",
                    "dialogue_context": ctx["context"].strip(),
                    "response": r["response"].strip(),
                    "system_id": r["model"],
                    "human_scores": {d: score(r[col]) for d, (col, _) in DIMENSIONS.items()},
                }
                fact = ctx.get("fact", "").strip()
                if fact:
                    record["fact_snippet"] = fact
                out.write(json.dumps(record, ensure_ascii=False) + "\n")
                count += 1
    print(f"wrote {count} items from {len(contexts)} contexts to {args.out}")


if __name__ == "__main__":
    main()
