#!/usr/bin/env python3
"""Convert the FairEval release into a pairwise JSONL dataset.

Inputs are the release's question file and two answer files (JSON lines
with `question_id` and `text`), plus a human label file with one line per
question in question-file order. A label line holds one or more labels
separated by whitespace or commas; several labels are read as
per-annotator votes and the majority becomes `human_label` (an even
split becomes Tie).

Accepted label spellings: 1/A1/Assistant1Wins, 2/A2/Assistant2Wins,
3/0/T/Tie (case-insensitive).
"""
import argparse
import collections
import json
import re
import sys

LABELS = {
    "1": "Assistant1Wins", "a1": "Assistant1Wins", "assistant1wins": "Assistant1Wins",
    "2": "Assistant2Wins", "a2": "Assistant2Wins", "assistant2wins": "Assistant2Wins",
    "3": "Tie", "0": "Tie", "t": "Tie", "tie": "Tie",
}


def read_jsonl(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def parse_labels(line, lineno):
    out = []
    for token in re.split(r"[\s,]+", line.strip()):
        if not token:
            continue
        try:
            out.append(LABELS[token.lower()])
        except KeyError:
            sys.exit(f"labels line {lineno}: unknown label {token!r}")
    if not out:
        sys.exit(f"labels line {lineno}: no label")
    return out


def majority(votes):
    counts = collections.Counter(votes).most_common()
    if len(counts) > 1 and counts[0][1] == counts[1][1]:
        return "Tie"
    return counts[0][0]


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--questions", required=True)
    p.add_argument("--answers-1", required=True, help="answers shown in position 1")
    p.add_argument("--answers-2", required=True, help="answers shown in position 2")
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    args = p.parse_args()

    questions = read_jsonl(args.questions)
    answers_1 = {a["question_id"]: a["text"] for a in read_jsonl(args.answers_1)}
    answers_2 = {a["question_id"]: a["text"] for a in read_jsonl(args.answers_2)}
    with open(args.labels, encoding="utf-8") as f:
        label_lines = [line for line in f if line.strip()]
    if len(label_lines) != len(questions):
        sys.exit(f"{len(label_lines)} label lines for {len(questions)} questions")

    with open(args.out, "w", encoding="utf-8") as out:
        out.write(json.dumps({"format": "pairwise", "version": 1}) + "\n")
        for n, (q, line) in enumerate(zip(questions, label_lines), start=1):
            qid = q["question_id"]
            votes = parse_labels(line, n)
            record = {
                "item_id": str(qid),
                "question": q["text"],
                "response_1": answers_1[qid],
                "response_2": answers_2[qid],
                "human_label": majority(votes),
            }
            if len(votes) > 1:
                record["per_annotator_labels"] = votes
            out.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"wrote {len(questions)} items to {args.out}")


if __name__ == "__main__":
    main()
