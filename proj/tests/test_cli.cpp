#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "json.hpp"
#include "stc/persistence.hpp"
#include "support/oracles.hpp"
#include "support/process.hpp"

using stc::testing::run_process;
using stc::testing::ScratchDir;

namespace {

const std::string kCli = STC_CLI_PATH;
const std::string kData = STC_DATA_DIR;

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

struct ToyBuild {
  ScratchDir dir{"stc_cli"};
  std::string bundle = (dir / "toy.stcb").string();
  stc::testing::ProcessResult result;

  ToyBuild() {
    result = run_process(kCli, {"build", "--corpus", kData + "/toy_corpus.jsonl", "--config",
                                kData + "/toy_engine.json", "--out", bundle, "--label", "toy"});
  }
};

}  // namespace

TEST_CASE("build writes a bundle and reports each stage", "[cli]") {
  ToyBuild toy;
  INFO(toy.result.err);
  REQUIRE(toy.result.exit_code == 0);
  CHECK(toy.result.out.find("ingest: raw=5 kept=3 dropped_non_text=1 dropped_noise=1 dropped_no_comments=0") !=
        std::string::npos);
  CHECK(toy.result.out.find("train: dim=8 epochs=30") != std::string::npos);
  CHECK(toy.result.out.find("wrote " + toy.bundle) != std::string::npos);

  const auto bundle = stc::load_bundle(toy.bundle);
  CHECK(bundle.corpus.size() == 3);
  CHECK(bundle.corpus.source_label == "toy");
  CHECK(bundle.manifest.pv.dim == 8);
}

TEST_CASE("build failures exit nonzero with a diagnostic", "[cli]") {
  ScratchDir dir("stc_cli");
  const auto out = (dir / "x.stcb").string();

  const auto bad = dir.write("bad.jsonl",
                             "{\"id\":\"1\",\"title\":\"t\",\"body\":\"b\",\"comments\":[{\"text\":\"c\"}]}\n"
                             "{\"id\":\"2\",\"title\":\"t\",\"body\":\"b\"\n");
  const auto r1 = run_process(kCli, {"build", "--corpus", bad.string(), "--out", out});
  CHECK(r1.exit_code != 0);
  CHECK(r1.err.find("MalformedRecord") != std::string::npos);
  CHECK(r1.err.find("line 2") != std::string::npos);

  const auto empty = dir.write("empty.jsonl", "");
  const auto r2 = run_process(kCli, {"build", "--corpus", empty.string(), "--out", out});
  CHECK(r2.exit_code != 0);
  CHECK(r2.err.find("EmptyTrainingCorpus") != std::string::npos);

  const auto r3 = run_process(kCli, {"build", "--corpus", (dir / "missing.jsonl").string(), "--out", out});
  CHECK(r3.exit_code != 0);
  CHECK(r3.err.find("IoFailure") != std::string::npos);

  const auto cfg = dir.write("bad.json", R"({"pv":{"dimm":8}})");
  const auto r4 = run_process(kCli, {"build", "--corpus", kData + "/toy_corpus.jsonl", "--config", cfg.string(),
                                     "--out", out});
  CHECK(r4.exit_code != 0);
  CHECK(r4.err.find("InvalidConfig") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(out));

  const auto r5 = run_process(kCli, {"query", "--bundle", (dir / "none.stcb").string(), "hi"});
  CHECK(r5.exit_code != 0);
}

TEST_CASE("seeded query output is reproducible", "[cli]") {
  ToyBuild toy;
  REQUIRE(toy.result.exit_code == 0);
  const std::vector<std::string> args = {"query", "--bundle", toy.bundle, "--seed", "7", "--debug", "broke up today"};
  const auto a = run_process(kCli, args);
  const auto b = run_process(kCli, args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("pool:") != std::string::npos);
  CHECK(a.out.find("matched (body):") != std::string::npos);

  // The printed answer is the starred pool entry.
  const auto lines = lines_of(a.out);
  REQUIRE(!lines.empty());
  const auto starred = std::ranges::find_if(lines, [](const std::string& l) { return l.starts_with("    *"); });
  REQUIRE(starred != lines.end());
  CHECK(starred->ends_with(" " + lines[0]));

  const auto empty = run_process(kCli, {"query", "--bundle", toy.bundle, "   "});
  CHECK(empty.exit_code != 0);
  CHECK(empty.err.find("EmptyQuery") != std::string::npos);
}

TEST_CASE("chat warns on blank lines and replays with a seed", "[cli]") {
  ToyBuild toy;
  REQUIRE(toy.result.exit_code == 0);
  const std::string transcript = "broke up today\n\nfirst date\n   \nconfess before graduation\nwhat now\n";
  const auto a = run_process(kCli, {"chat", "--bundle", toy.bundle, "--seed", "3"}, transcript);
  const auto b = run_process(kCli, {"chat", "--bundle", toy.bundle, "--seed", "3"}, transcript);
  INFO(a.err);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(lines_of(a.out).size() == 4);  // one answer per non-blank line
  const auto warnings = lines_of(a.err);
  CHECK(std::ranges::count_if(warnings, [](const std::string& l) { return l.starts_with("warning:"); }) == 2);
}

TEST_CASE("a title query answers from that post's most popular comments", "[cli][oracle]") {
  ToyBuild toy;
  REQUIRE(toy.result.exit_code == 0);
  const auto bundle = stc::load_bundle(toy.bundle);

  // Match a single post so the answer must come from its top two comments.
  auto engine = nlohmann::json::parse(stc::testing::slurp(kData + "/toy_engine.json"));
  engine["pipeline"]["match_m"] = 1;
  const auto cfg_path = toy.dir.write("one.json", engine.dump());
  const auto cfg = stc::load_engine_config(cfg_path.string()).pipeline;

  for (const auto& post : bundle.corpus.posts) {
    const auto retrieved = stc::oracle::retrieve(post.title, bundle, cfg);
    const auto matched = stc::oracle::match(post.title, retrieved, bundle, cfg);
    REQUIRE(matched.size() == 1);
    CHECK(matched[0] == post.corpus_ordinal);

    // top two comments by likes - dislikes, earlier comment on ties
    std::vector<std::pair<std::int64_t, std::size_t>> ranked;
    const auto& comments = bundle.corpus.posts[matched[0]].comments;
    for (std::size_t i = 0; i < comments.size(); ++i) {
      ranked.push_back({-(std::int64_t(comments[i].likes) - std::int64_t(comments[i].dislikes)), i});
    }
    std::sort(ranked.begin(), ranked.end());
    std::set<std::string> allowed;
    for (std::size_t i = 0; i < std::min<std::size_t>(2, ranked.size()); ++i) {
      allowed.insert(comments[ranked[i].second].text);
    }

    for (int seed = 0; seed < 6; ++seed) {
      const auto r = run_process(kCli, {"query", "--bundle", toy.bundle, "--config", cfg_path.string(), "--seed",
                                        std::to_string(seed), post.title});
      REQUIRE(r.exit_code == 0);
      const auto lines = lines_of(r.out);
      REQUIRE(lines.size() == 1);
      INFO("title '" << post.title << "' answer '" << lines[0] << "'");
      CHECK(allowed.count(lines[0]) == 1);
    }
  }
}
