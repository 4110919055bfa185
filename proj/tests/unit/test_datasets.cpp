#include <doctest.h>

#include <cstdlib>

#include "referee/datasets.hpp"
#include "referee/error.hpp"
#include "support.hpp"

using namespace referee;

namespace {

std::string pairwise_line(int i, const char* label = "Assistant1Wins") {
  return Json{{"item_id", "q" + std::to_string(i)},
              {"question", "Question " + std::to_string(i)},
              {"response_1", "first"},
              {"response_2", "second"},
              {"human_label", label}}
             .dump();
}

const std::string kPairHeader = R"({"format":"pairwise","version":1})";
const std::string kScoreHeader =
    R"({"format":"scoring","version":1,"scales":{"naturalness":[1,3],"coherence":[1,3],"engagingness":[1,3],"groundedness":[0,1]}})";

std::string scoring_line(const std::string& id, double nat = 2) {
  return Json{{"item_id", id},
              {"dialogue_context", "A: hi"},
              {"response", "hello"},
              {"system_id", "sys"},
              {"human_scores", {{"naturalness", nat}, {"coherence", 2}, {"engagingness", 1}, {"groundedness", 0}}}}
      .dump();
}

}  // namespace

TEST_CASE("pairwise file with 80 items") {
  testing::TempDir tmp;
  std::string text = kPairHeader + "\n";
  for (int i = 1; i <= 80; ++i) text += pairwise_line(i) + "\n";
  testing::write_file(tmp / "fe.jsonl", text);
  const auto loaded = load_pairwise(tmp / "fe.jsonl");
  CHECK(loaded.items.size() == 80);
  CHECK(loaded.warnings.empty());
  CHECK(loaded.items[0].item_id == "q1");
  CHECK(loaded.items[79].item_id == "q80");
  // Idempotent, order-preserving, and round-trips.
  CHECK(load_pairwise(tmp / "fe.jsonl").items == loaded.items);
  for (const auto& item : loaded.items) CHECK(from_record<PairwiseItem>(to_record(item)) == item);
}

TEST_CASE("pairwise loader errors") {
  testing::TempDir tmp;
  testing::write_file(tmp / "empty.jsonl", "");
  const auto empty = load_pairwise(tmp / "empty.jsonl");
  CHECK(empty.items.empty());
  REQUIRE(empty.warnings.size() == 1);
  CHECK(empty.warnings[0].find("empty dataset") != std::string::npos);

  auto blank_r2 = Json::parse(pairwise_line(1));
  blank_r2["response_2"] = "";
  testing::write_file(tmp / "blank.jsonl", kPairHeader + "\n" + blank_r2.dump() + "\n");
  CHECK_ERROR_CODE(load_pairwise(tmp / "blank.jsonl"), ErrorCode::SchemaViolation);

  testing::write_file(tmp / "dup.jsonl", kPairHeader + "\n" + pairwise_line(1) + "\n" + pairwise_line(1) + "\n");
  CHECK_ERROR_CODE(load_pairwise(tmp / "dup.jsonl"), ErrorCode::DuplicateId);

  testing::write_file(tmp / "bad.jsonl", kPairHeader + "\n{not json\n");
  try {
    load_pairwise(tmp / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  testing::write_file(tmp / "noheader.jsonl", pairwise_line(1) + "\n");
  CHECK_ERROR_CODE(load_pairwise(tmp / "noheader.jsonl"), ErrorCode::SchemaViolation);

  testing::write_file(tmp / "label.jsonl", kPairHeader + "\n" + pairwise_line(1, "Draw") + "\n");
  CHECK_ERROR_CODE(load_pairwise(tmp / "label.jsonl"), ErrorCode::SchemaViolation);

  auto votes = Json::parse(pairwise_line(1));
  votes["per_annotator_labels"] = {"Assistant2Wins", "Assistant2Wins", "Tie"};
  testing::write_file(tmp / "votes.jsonl", kPairHeader + "\n" + votes.dump() + "\n");
  CHECK_ERROR_CODE(load_pairwise(tmp / "votes.jsonl"), ErrorCode::SchemaViolation);
  votes["human_label"] = "Assistant2Wins";
  testing::write_file(tmp / "votes.jsonl", kPairHeader + "\n" + votes.dump() + "\n");
  CHECK(load_pairwise(tmp / "votes.jsonl").items[0].per_annotator_labels->size() == 3);

  CHECK_ERROR_CODE(load_pairwise(tmp / "missing.jsonl"), ErrorCode::Io);
}

TEST_CASE("scoring file with 60 contexts by 6 systems") {
  testing::TempDir tmp;
  std::string text = kScoreHeader + "\n";
  for (int c = 1; c <= 60; ++c) {
    for (int s = 1; s <= 6; ++s) text += scoring_line("c" + std::to_string(c) + "-s" + std::to_string(s)) + "\n";
  }
  testing::write_file(tmp / "tc.jsonl", text);
  const auto loaded = load_scoring(tmp / "tc.jsonl");
  CHECK(loaded.items.size() == 360);
  CHECK(loaded.scales.at("groundedness") == ScoreScale{0, 1});
  CHECK(loaded.items[0].scale == loaded.scales);
  for (const auto& item : loaded.items) CHECK(from_record<ScoringItem>(to_record(item)) == item);

  const auto data = load_dataset(tmp / "tc.jsonl", DatasetKind::Scoring);
  CHECK(data.size() == 360);
  const auto item = to_debate_item(data.scoring[0]);
  CHECK(item.compared_text_one == "hello");
  CHECK(item.fact_snippet.empty());
}

TEST_CASE("scoring loader errors") {
  testing::TempDir tmp;
  testing::write_file(tmp / "oos.jsonl", kScoreHeader + "\n" + scoring_line("a", 4) + "\n");
  CHECK_ERROR_CODE(load_scoring(tmp / "oos.jsonl"), ErrorCode::OutOfScale);

  auto unknown = Json::parse(scoring_line("a"));
  unknown["human_scores"]["fluency"] = 2;
  testing::write_file(tmp / "dim.jsonl", kScoreHeader + "\n" + unknown.dump() + "\n");
  CHECK_ERROR_CODE(load_scoring(tmp / "dim.jsonl"), ErrorCode::SchemaViolation);

  testing::write_file(tmp / "hdr.jsonl", R"({"format":"scoring","version":1,"scales":{"fluency":[1,3]}})" "\n");
  CHECK_ERROR_CODE(load_scoring(tmp / "hdr.jsonl"), ErrorCode::SchemaViolation);

  testing::write_file(tmp / "noscale.jsonl",
                      R"({"format":"scoring","version":1,"scales":{"coherence":[1,3]}})" "\n" + scoring_line("a") + "\n");
  CHECK_ERROR_CODE(load_scoring(tmp / "noscale.jsonl"), ErrorCode::SchemaViolation);

  auto contradict = Json::parse(scoring_line("a"));
  contradict["scale"] = {{"coherence", {1, 5}}};
  testing::write_file(tmp / "contra.jsonl", kScoreHeader + "\n" + contradict.dump() + "\n");
  CHECK_ERROR_CODE(load_scoring(tmp / "contra.jsonl"), ErrorCode::SchemaViolation);

  testing::write_file(tmp / "dup.jsonl", kScoreHeader + "\n" + scoring_line("a") + "\n" + scoring_line("a") + "\n");
  CHECK_ERROR_CODE(load_scoring(tmp / "dup.jsonl"), ErrorCode::DuplicateId);

  testing::write_file(tmp / "wrongkind.jsonl", kPairHeader + "\n");
  CHECK_ERROR_CODE(load_scoring(tmp / "wrongkind.jsonl"), ErrorCode::SchemaViolation);
}

TEST_CASE("shipped fixtures load") {
  CHECK(load_pairwise(testing::fixture("pairwise10.jsonl")).items.size() == 10);
  CHECK(load_scoring(testing::fixture("scoring6.jsonl")).items.size() == 6);
  CHECK(parse_dataset_kind("scoring") == DatasetKind::Scoring);
  CHECK_ERROR_CODE(parse_dataset_kind("ranking"), ErrorCode::InvalidConfig);
}

TEST_CASE("ingestion scripts produce loadable files") {
  if (std::system("python3 --version >/dev/null 2>&1") != 0) return;
  testing::TempDir tmp;
  const auto tools = testing::source_dir() / "tools" / "ingest";
  const auto up = testing::fixture("upstream");
  const auto fe = "python3 " + (tools / "convert_faireval.py").string() + " --questions " + (up / "question.jsonl").string() +
                  " --answers-1 " + (up / "answer_a.jsonl").string() + " --answers-2 " + (up / "answer_b.jsonl").string() +
                  " --labels " + (up / "labels.txt").string() + " --out " + (tmp / "fe.jsonl").string() + " >/dev/null";
  REQUIRE(std::system(fe.c_str()) == 0);
  const auto pairs = load_pairwise(tmp / "fe.jsonl");
  REQUIRE(pairs.items.size() == 3);
  CHECK(pairs.items[0].human_label == Preference::Assistant1Wins);
  CHECK(pairs.items[0].per_annotator_labels->size() == 3);
  CHECK(pairs.items[1].human_label == Preference::Tie);
  CHECK(!pairs.items[1].per_annotator_labels);
  CHECK(pairs.items[2].human_label == Preference::Tie);
  CHECK(pairs.items[2].response_2 == "Hola.");

  const auto tc = "python3 " + (tools / "convert_usr_topical_chat.py").string() + " --input " +
                  (up / "tc_usr_data.json").string() + " --out " + (tmp / "tc.jsonl").string() + " >/dev/null";
  REQUIRE(std::system(tc.c_str()) == 0);
  const auto scored = load_scoring(tmp / "tc.jsonl");
  REQUIRE(scored.items.size() == 2);
  CHECK(scored.items[0].human_scores.at("naturalness") == doctest::Approx(8.0 / 3));
  CHECK(scored.items[0].human_scores.at("groundedness") == doctest::Approx(2.0 / 3));
  CHECK(scored.items[0].fact_snippet == "Jazz started in New Orleans.");
  CHECK(scored.items[1].system_id == "Argmax Decoding");
  CHECK(scored.items[1].dialogue_context == "A: do you like jazz?");
}
