// Command-line front end: offline bundle building and online chat.
//
//   stc build --corpus posts.jsonl [--config engine.json] --out chat.stcb
//   stc query --bundle chat.stcb [--seed N] [--debug] "query text"
//   stc chat  --bundle chat.stcb [--seed N] [--debug]
//   stc serve --bundle chat.stcb [--config engine.json] [--listen host:port]

#include <unistd.h>

#include <chrono>
#include <csignal>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "CLI11.hpp"

#include "stc/stc.hpp"
#include "stc/service.hpp"

namespace {

std::string utc_now_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

stc::PipelineConfig pipeline_for(const stc::IndexBundle& bundle, const std::string& config_path) {
  if (config_path.empty()) return bundle.manifest.pipeline_defaults;
  return stc::load_engine_config(config_path).pipeline;
}

void print_debug(std::ostream& out, const stc::ChatResponse& r, const stc::Corpus& corpus) {
  out << "  retrieved: " << r.retrieved.size() << " posts\n";
  out << "  matched (" << stc::to_string(r.match_field) << "):\n";
  for (const auto& m : r.matched) {
    out << "    #" << m.corpus_ordinal << "  " << std::fixed << std::setprecision(4) << m.score
        << "  " << corpus.posts[m.corpus_ordinal].title << '\n';
  }
  out << "  pool:\n";
  for (std::size_t i = 0; i < r.pool.size(); ++i) {
    const auto& c = r.pool[i];
    out << "    " << (i == r.chosen_index ? '*' : ' ') << " #" << c.post_ordinal << '/'
        << c.comment_index << " (" << std::showpos << c.popularity << std::noshowpos << ") "
        << c.text << '\n';
  }
  if (r.low_confidence) out << "  low confidence: no lexical overlap with matched posts\n";
  out.unsetf(std::ios::floatfield);
}

int run_build(const std::string& corpus_path, const std::string& config_path,
              const std::string& out_path, const std::string& label) {
  stc::EngineConfig config;
  if (!config_path.empty()) config = stc::load_engine_config(config_path);

  std::ifstream in(corpus_path);
  if (!in) throw stc::Error(stc::ErrorCode::IoFailure, "cannot open corpus '" + corpus_path + "'");
  auto raw = stc::read_raw_posts(in);
  if (raw.empty()) {
    throw stc::Error(stc::ErrorCode::EmptyTrainingCorpus, "corpus file has no records");
  }

  auto [corpus, report] = stc::filter_corpus(raw, config.filter, config.tokenizer);
  corpus.source_label = label.empty() ? corpus_path : label;
  corpus.ingested_at = utc_now_iso8601();
  std::cout << "ingest: raw=" << report.raw_count << " kept=" << report.kept_count
            << " dropped_non_text=" << report.dropped_non_text
            << " dropped_noise=" << report.dropped_noise
            << " dropped_no_comments=" << report.dropped_no_comments << '\n';

  auto [bundle, training] =
      stc::build_bundle(std::move(corpus), config.tokenizer, config.pv, config.pipeline);
  std::cout << "index: title_vocab=" << bundle.manifest.counts.title_vocab
            << " body_vocab=" << bundle.manifest.counts.body_vocab << '\n';
  std::cout << "train: dim=" << config.pv.dim << " epochs=" << training.per_epoch_mean_loss.size()
            << " examples=" << training.total_examples << " first_loss="
            << training.per_epoch_mean_loss.front()
            << " final_loss=" << training.per_epoch_mean_loss.back()
            << " seconds=" << training.wall_time_seconds << '\n';

  stc::save_bundle(bundle, out_path);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

int run_query(const std::string& bundle_path, const std::string& config_path,
              std::optional<std::uint64_t> seed, bool debug, const std::string& query) {
  const auto bundle = stc::load_bundle(bundle_path);
  auto cfg = pipeline_for(bundle, config_path);
  if (seed) cfg.response_seed = seed;
  const auto r = stc::respond(query, bundle, cfg);
  std::cout << r.text << '\n';
  if (debug) print_debug(std::cout, r, bundle.corpus);
  return 0;
}

int run_chat(const std::string& bundle_path, const std::string& config_path,
             std::optional<std::uint64_t> seed, bool debug) {
  const auto bundle = stc::load_bundle(bundle_path);
  auto cfg = pipeline_for(bundle, config_path);
  // Each turn draws its own seed from the session generator, so a seeded
  // session replays identically for the same transcript.
  std::mt19937_64 session(seed ? *seed : std::random_device{}());
  const bool interactive = isatty(STDIN_FILENO);
  std::string line;
  while (true) {
    if (interactive) std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    cfg.response_seed = session();
    try {
      const auto r = stc::respond(line, bundle, cfg);
      std::cout << r.text << '\n';
      if (debug) print_debug(std::cout, r, bundle.corpus);
    } catch (const stc::Error& e) {
      if (e.code() != stc::ErrorCode::EmptyQuery) throw;
      std::cerr << "warning: empty query, type something\n";
    }
    std::cout << std::flush;
  }
  return 0;
}

int run_serve(const std::string& bundle_path, const std::string& config_path,
              const std::string& listen) {
  auto bundle = std::make_shared<const stc::IndexBundle>(stc::load_bundle(bundle_path));
  std::string address = "127.0.0.1:8080";
  stc::PipelineConfig cfg = bundle->manifest.pipeline_defaults;
  if (!config_path.empty()) {
    const auto config = stc::load_engine_config(config_path);
    address = config.listen_address;
    cfg = config.pipeline;
  }
  if (!listen.empty()) address = listen;
  const auto addr = stc::parse_listen_address(address);

  stc::ChatService service(bundle, cfg);
  httplib::Server server;
  service.mount(server);
  std::cerr << "serving " << bundle->corpus.size() << " posts on http://" << addr.host << ':'
            << addr.port << "/v1\n";
  if (!server.listen(addr.host, addr.port)) {
    throw stc::Error(stc::ErrorCode::IoFailure, "cannot listen on " + address);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-based short-text conversation engine"};
  app.require_subcommand(1);

  std::string corpus_path, config_path, out_path, bundle_path, listen, label, query;
  std::optional<std::uint64_t> seed;
  bool debug = false;

  auto* build = app.add_subcommand("build", "Ingest a corpus and write an index bundle");
  build->add_option("--corpus", corpus_path, "Newline-delimited JSON posts")->required();
  build->add_option("--config", config_path, "Engine configuration (JSON)");
  build->add_option("--out", out_path, "Bundle file to write")->required();
  build->add_option("--label", label, "Source label stored with the corpus");

  auto* chat = app.add_subcommand("chat", "Interactive chat on stdin/stdout");
  auto* one = app.add_subcommand("query", "Answer a single query");
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  for (auto* sub : {chat, one, serve}) {
    sub->add_option("--bundle", bundle_path, "Index bundle")->required();
    sub->add_option("--config", config_path, "Engine configuration (JSON)");
  }
  for (auto* sub : {chat, one}) {
    sub->add_option("--seed", seed, "Seed for response selection");
    sub->add_flag("--debug", debug, "Print matched posts and the candidate pool");
  }
  one->add_option("query", query, "Query text")->required();
  serve->add_option("--listen", listen, "host:port, overrides the config file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return run_build(corpus_path, config_path, out_path, label);
    if (*one) return run_query(bundle_path, config_path, seed, debug, query);
    if (*chat) return run_chat(bundle_path, config_path, seed, debug);
    if (*serve) return run_serve(bundle_path, config_path, listen);
  } catch (const stc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
