// Command-line front-end for the controllable-summarization toolkit.
//
// Pipeline stages, each a subcommand reading/writing newline-delimited JSON:
//   extract          corpus -> oracle keywords (+ selected sentences)
//   tag-data         corpus -> token/label records for an external tagger
//   buckets          corpus -> length-bucket table (percentile boundaries, K)
//   select-keywords  corpus + tagger probabilities -> inference keywords
//   format           corpus + keywords/entities/prompt -> model inputs
//   summarize        model inputs -> summaries via an endpoint (mock|cmd|tcp)
//   evaluate         summaries + corpus -> metric report
//   sweep            grid of extraction settings -> per-setting ROUGE rows
//
// Exit codes: 0 success, 1 input or validation error, 2 endpoint/protocol
// error. Logs go to stderr; data goes to files or stdout only.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "ctrlkit/ctrlkit.hpp"

namespace {

using namespace ctrlkit;

void log_line(const std::string& message) { std::cerr << "[ctrlkit] " << message << "\n"; }

// Options shared by every subcommand. String slots let load_config do the
// parsing so error messages are uniform; only user-set keys enter the layer.
struct CommonOpts {
  std::optional<std::string> config_path;
  std::map<std::string, std::string> flags;
  std::size_t jobs = 0;
};

void add_common_options(CLI::App* sub, CommonOpts& opts) {
  sub->add_option_function<std::string>(
         "--config", [&opts](const std::string& v) { opts.config_path = v; },
         "JSON config file mirroring the run configuration");
  const auto capture = [&opts, sub](const std::string& flag, const std::string& key,
                                    const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&opts, key](const std::string& v) { opts.flags[key] = v; }, help);
  };
  capture("--profile", "profile", "cnndm, arxiv, bigpatent, or custom");
  capture("--ns", "n_s", "sentences kept by the keyword selector");
  capture("--epsilon", "epsilon", "token probability threshold");
  capture("--mmax", "m_max", "maximum keywords kept");
  capture("--dropout", "dropout_rate", "training keyword dropout rate");
  capture("--seed", "seed", "global random seed");
  capture("--sep", "sep_token", "keyword/document separator token");
  capture("--max-source-tokens", "max_source_tokens", "source truncation limit");
  capture("--max-reference-tokens", "max_reference_tokens", "reference truncation limit");
  capture("--stopwords", "stopwords", "stopword list file, one word per line");
  capture("--abbreviations", "abbreviations", "abbreviation list file, one entry per line");
  sub->add_option("--jobs", opts.jobs, "worker threads (0 = logical cores)");
}

// Everything a stage needs once the configuration is resolved.
struct Pipeline {
  RunConfig cfg;
  StopwordSet stopwords;
  AbbrevSet abbrevs;
  OracleConfig oracle;

  explicit Pipeline(const CommonOpts& opts) {
    cfg = load_config(opts.config_path, opts.flags);
    stopwords =
        cfg.stopwords_path.empty() ? default_stopwords() : load_stopwords(cfg.stopwords_path);
    abbrevs = cfg.abbreviations_path.empty() ? default_abbreviations()
                                             : load_abbreviations(cfg.abbreviations_path);
    oracle.stopwords = &stopwords;
    oracle.abbreviations = &abbrevs;
    oracle.max_source_tokens = cfg.max_source_tokens;
    oracle.max_reference_tokens = cfg.max_reference_tokens;
    log_line(describe(cfg));
  }
};

// CLI --limit uses 0 for "all"; load_corpus wants an absent optional for that.
std::optional<std::size_t> limit_opt(std::size_t limit) {
  if (limit == 0) return std::nullopt;
  return limit;
}

std::string jsonl(std::vector<std::string> lines) {
  if (lines.empty()) return "";
  return join(lines, "\n") + "\n";
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string part =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!part.empty()) parts.push_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

// ---- extract ----------------------------------------------------------

struct ExtractOpts {
  std::string in, out;
  std::size_t limit = 0;
  std::size_t max_oracle_sentences = 0;
};

int run_extract(const ExtractOpts& o, const CommonOpts& common) {
  Pipeline p(common);
  p.oracle.max_sentences = o.max_oracle_sentences;
  const std::vector<Example> corpus = load_corpus(o.in, limit_opt(o.limit));
  const std::vector<std::string> lines = parallel_map(
      corpus.size(),
      [&](std::size_t i) {
        const OracleResult result = extract_oracle(corpus[i], p.oracle);
        KeywordRecord record{result.id, result.keywords, result.selected_sentences, true};
        return keyword_record_to_json(record).dump();
      },
      common.jobs);
  atomic_write(o.out, jsonl(lines));
  log_line("extract: " + std::to_string(lines.size()) + " records -> " + o.out);
  return 0;
}

// ---- tag-data ---------------------------------------------------------

struct TagDataOpts {
  std::string in, out;
  std::size_t limit = 0;
};

int run_tag_data(const TagDataOpts& o, const CommonOpts& common) {
  Pipeline p(common);
  const std::vector<Example> corpus = load_corpus(o.in, limit_opt(o.limit));
  const std::vector<std::string> lines = parallel_map(
      corpus.size(),
      [&](std::size_t i) {
        const OracleResult result = extract_oracle(corpus[i], p.oracle);
        return tagger_example_to_json(emit_tagger_example(corpus[i], result, p.oracle)).dump();
      },
      common.jobs);
  atomic_write(o.out, jsonl(lines));
  log_line("tag-data: " + std::to_string(lines.size()) + " records -> " + o.out);
  return 0;
}

// ---- buckets ----------------------------------------------------------

struct BucketsOpts {
  std::string in, out;
  std::size_t limit = 0;
};

int run_buckets(const BucketsOpts& o, const CommonOpts& common) {
  Pipeline p(common);
  const std::vector<Example> corpus = load_corpus(o.in, limit_opt(o.limit));
  struct Stats {
    std::size_t length = 0;
    std::size_t keywords = 0;
  };
  const std::vector<Stats> stats = parallel_map(
      corpus.size(),
      [&](std::size_t i) {
        const Example& example = corpus[i];
        if (!example.reference) {
          throw std::runtime_error("example \"" + example.id + "\" has no reference summary");
        }
        Stats s;
        s.length = truncate(tokenize(*example.reference, p.oracle.abbreviations),
                            p.cfg.max_reference_tokens)
                       .size();
        s.keywords = extract_oracle(example, p.oracle).keywords.total_keywords();
        return s;
      },
      common.jobs);
  std::vector<std::size_t> lengths, counts;
  lengths.reserve(stats.size());
  counts.reserve(stats.size());
  for (const Stats& s : stats) {
    lengths.push_back(s.length);
    counts.push_back(s.keywords);
  }
  const LengthBucketTable table = compute_length_buckets(lengths, counts);
  atomic_write(o.out, bucket_table_to_json(table).dump(2) + "\n");
  std::string ks;
  for (const std::size_t k : table.K) ks += (ks.empty() ? "" : ",") + std::to_string(k);
  log_line("buckets: K=[" + ks + "] -> " + o.out);
  return 0;
}

// ---- select-keywords --------------------------------------------------

struct SelectOpts {
  std::string in, probs, out;
  std::size_t limit = 0;
  int length_bucket = -1;
  std::string buckets_path;
  bool no_dedup = false;
  std::size_t length_sentence_prefilter = 0;
};

int run_select(const SelectOpts& o, const CommonOpts& common) {
  Pipeline p(common);
  const std::vector<Example> corpus = load_corpus(o.in, limit_opt(o.limit));
  const std::unordered_map<std::string, ProbsRecord> prob_map = load_probs_file(o.probs);

  std::optional<LengthBucketTable> table;
  if (o.length_bucket >= 0) {
    if (o.buckets_path.empty()) {
      throw std::runtime_error("--length-bucket requires --buckets");
    }
    table = load_bucket_table(o.buckets_path);
  } else if (!o.buckets_path.empty()) {
    throw std::runtime_error("--buckets requires --length-bucket");
  }

  const std::vector<std::string> lines = parallel_map(
      corpus.size(),
      [&](std::size_t i) {
        const Example& example = corpus[i];
        const TokenSequence doc = truncate(tokenize(example.source, p.oracle.abbreviations),
                                           p.cfg.max_source_tokens);
        const std::vector<Sentence> sentences = split_sentences(doc, p.oracle.abbreviations);
        const auto it = prob_map.find(example.id);
        if (it == prob_map.end()) {
          throw std::runtime_error("no probabilities for id \"" + example.id + "\"");
        }
        const std::vector<double> probs = it->second.resolve(doc.size());
        const KeywordSet keywords =
            table ? length_keywords(doc, sentences, probs, o.length_bucket, *table, &p.stopwords,
                                    o.length_sentence_prefilter)
                  : select_inference_keywords(doc, sentences, probs, p.cfg.extraction,
                                              &p.stopwords, !o.no_dedup);
        return keyword_record_to_json(KeywordRecord{example.id, keywords, {}, false}).dump();
      },
      common.jobs);
  atomic_write(o.out, jsonl(lines));
  log_line("select-keywords: " + std::to_string(lines.size()) + " records -> " + o.out);
  return 0;
}

// ---- format -----------------------------------------------------------

struct FormatOpts {
  std::string in, keywords_path, out;
  std::string prompt_kind;
  std::string prompt_mode = "prefix_and_keywords";
  bool entities = false;
  bool with_target = false;
  bool compact_prompts = false;
  std::size_t limit = 0;
};

int run_format(const FormatOpts& o, const CommonOpts& common) {
  Pipeline p(common);
  if (o.entities && !o.keywords_path.empty()) {
    throw std::runtime_error("--entities and --keywords are mutually exclusive");
  }
  if (o.entities && !o.prompt_kind.empty()) {
    throw std::runtime_error("--entities and --prompt are mutually exclusive");
  }
  // Dropout thins keywords only when emitting training pairs; inference
  // formatting always keeps the full keyword set.
  const bool training = o.with_target && !o.keywords_path.empty();
  if (common.flags.count("dropout_rate") && !training) {
    throw std::runtime_error("--dropout applies only with --keywords and --with-target");
  }
  const PromptMode mode = parse_prompt_mode(o.prompt_mode);

  const std::vector<Example> corpus = load_corpus(o.in, limit_opt(o.limit));

  std::unordered_map<std::string, KeywordSet> keyword_map;
  if (!o.keywords_path.empty()) {
    for (KeywordRecord& record : load_keyword_file(o.keywords_path)) {
      if (!keyword_map.emplace(record.id, std::move(record.keywords)).second) {
        throw std::runtime_error(o.keywords_path + ": duplicate id \"" + record.id + "\"");
      }
    }
  }

  const std::vector<std::string> lines = parallel_map(
      corpus.size(),
      [&](std::size_t i) {
        const Example& example = corpus[i];
        ControlSpec spec;
        if (o.entities) {
          if (example.entities.empty()) {
            throw std::runtime_error("example \"" + example.id + "\" lists no entities");
          }
          spec = entity_control(example.entities);
        } else if (!o.keywords_path.empty()) {
          const auto it = keyword_map.find(example.id);
          if (it == keyword_map.end()) {
            throw std::runtime_error("no keywords for id \"" + example.id + "\"");
          }
          spec.keywords = it->second;
          if (training && p.cfg.dropout_rate > 0.0) {
            spec.keywords = dropout_keywords(spec.keywords, p.cfg.dropout_rate,
                                             per_example_seed(p.cfg.seed, example.id));
          }
        }
        if (!o.prompt_kind.empty()) {
          const PromptKind kind = parse_prompt_kind(o.prompt_kind);
          if (kind == PromptKind::qa && !example.question) {
            throw std::runtime_error("example \"" + example.id +
                                     "\" has no question for the qa prompt");
          }
          spec.prompt = make_prompt(kind, example.question, o.compact_prompts);
          spec.prompt_mode = mode;
        }

        const std::string source =
            truncate_text(example.source, p.cfg.max_source_tokens, p.oracle.abbreviations);
        const FormattedInput fi = format_input(spec, source, p.cfg.sep_token);
        FormattedRecord record{example.id, fi.encoder_text, fi.decoder_prefix, {}};
        if (o.with_target) {
          if (!example.reference) {
            throw std::runtime_error("example \"" + example.id +
                                     "\" has no reference for --with-target");
          }
          record.target = truncate_text(*example.reference, p.cfg.max_reference_tokens,
                                        p.oracle.abbreviations);
        }
        return formatted_record_to_json(record).dump();
      },
      common.jobs);
  atomic_write(o.out, jsonl(lines));
  log_line("format: " + std::to_string(lines.size()) + " records -> " + o.out);
  return 0;
}

// ---- summarize --------------------------------------------------------

struct SummarizeOpts {
  std::string in, out;
  std::string endpoint = "mock";
  std::size_t max_in_flight = 8;
  double timeout_s = 30.0;
  std::size_t mock_sentences = 3;
};

int run_summarize(const SummarizeOpts& o, const CommonOpts& common) {
  Pipeline p(common);
  const std::vector<FormattedRecord> records = load_formatted_file(o.in);
  std::vector<SummarizeRequest> requests;
  requests.reserve(records.size());
  for (const FormattedRecord& record : records) {
    requests.push_back(SummarizeRequest{record.id, record.encoder_text, record.decoder_prefix});
  }
  const Endpoint endpoint = parse_endpoint(o.endpoint);
  const MockConfig mock_cfg{p.cfg.sep_token, o.mock_sentences};
  const std::vector<SummarizeResponse> responses =
      summarize_batch(endpoint, requests, o.max_in_flight, o.timeout_s, mock_cfg);
  std::vector<std::string> lines;
  lines.reserve(responses.size());
  for (const SummarizeResponse& response : responses) {
    lines.push_back(nlohmann::json{{"id", response.id}, {"summary", response.summary}}.dump());
  }
  atomic_write(o.out, jsonl(lines));
  log_line("summarize: " + std::to_string(lines.size()) + " summaries -> " + o.out);
  return 0;
}

// ---- evaluate ---------------------------------------------------------

struct EvaluateOpts {
  std::string in, corpus;
  std::string aspects = "rouge";
  std::string buckets_path;
  std::string requested_path;
  std::string out;
};

int run_evaluate(const EvaluateOpts& o, const CommonOpts& common) {
  Pipeline p(common);
  std::vector<Prediction> predictions = load_predictions_file(o.in);
  const std::vector<Example> corpus = load_corpus(o.corpus);

  std::set<std::string> aspects;
  for (const std::string& aspect : split_csv(o.aspects)) aspects.insert(aspect);

  std::optional<LengthBucketTable> table;
  if (!o.buckets_path.empty()) table = load_bucket_table(o.buckets_path);

  if (!o.requested_path.empty()) {
    const std::unordered_map<std::string, int> codes = load_requested_codes(o.requested_path);
    for (Prediction& prediction : predictions) {
      const auto it = codes.find(prediction.id);
      if (it == codes.end()) {
        throw std::runtime_error("no requested bucket code for id \"" + prediction.id + "\"");
      }
      prediction.requested_bucket = it->second;
    }
  }

  const EvalReport report =
      evaluate_run(predictions, corpus, aspects, table ? &*table : nullptr,
                   p.oracle.abbreviations);
  const std::string json = report_to_json(report).dump(2) + "\n";
  if (!o.out.empty()) {
    atomic_write(o.out, json);
    log_line("evaluate: report -> " + o.out);
    std::cout << report_to_table(report);
  } else {
    std::cout << json;
    std::cerr << report_to_table(report);
  }
  return 0;
}

// ---- sweep ------------------------------------------------------------

struct SweepOpts {
  std::string in, probs, out;
  std::string endpoint = "mock";
  std::string ns_csv, epsilon_csv, mmax_csv;
  std::size_t limit = 0;
  std::size_t max_in_flight = 8;
  double timeout_s = 30.0;
  std::size_t mock_sentences = 3;
};

int run_sweep(const SweepOpts& o, const CommonOpts& common) {
  Pipeline p(common);

  std::vector<std::size_t> ns_values;
  std::vector<double> epsilon_values;
  std::vector<std::size_t> mmax_values;
  for (const std::string& v : split_csv(o.ns_csv)) {
    ns_values.push_back(ctrlkit::detail::parse_u64(v, "ns"));
  }
  for (const std::string& v : split_csv(o.epsilon_csv)) {
    epsilon_values.push_back(ctrlkit::detail::parse_real(v, "epsilon"));
  }
  for (const std::string& v : split_csv(o.mmax_csv)) {
    mmax_values.push_back(ctrlkit::detail::parse_u64(v, "mmax"));
  }
  if (ns_values.empty()) ns_values.push_back(p.cfg.extraction.n_s);
  if (epsilon_values.empty()) epsilon_values.push_back(p.cfg.extraction.epsilon);
  if (mmax_values.empty()) mmax_values.push_back(p.cfg.extraction.m_max);

  const std::vector<Example> corpus = load_corpus(o.in, limit_opt(o.limit));
  if (corpus.empty()) {
    throw std::runtime_error("sweep: empty corpus");
  }
  const std::unordered_map<std::string, ProbsRecord> prob_map = load_probs_file(o.probs);

  // Tokenization is shared across every grid cell.
  struct Doc {
    TokenSequence tokens;
    std::vector<Sentence> sentences;
    std::vector<double> probs;
    std::string source_text;
  };
  const std::vector<Doc> docs = parallel_map(
      corpus.size(),
      [&](std::size_t i) {
        const Example& example = corpus[i];
        if (!example.reference) {
          throw std::runtime_error("example \"" + example.id + "\" has no reference summary");
        }
        Doc d;
        d.source_text =
            truncate_text(example.source, p.cfg.max_source_tokens, p.oracle.abbreviations);
        d.tokens = truncate(tokenize(example.source, p.oracle.abbreviations),
                            p.cfg.max_source_tokens);
        d.sentences = split_sentences(d.tokens, p.oracle.abbreviations);
        const auto it = prob_map.find(example.id);
        if (it == prob_map.end()) {
          throw std::runtime_error("no probabilities for id \"" + example.id + "\"");
        }
        d.probs = it->second.resolve(d.tokens.size());
        return d;
      },
      common.jobs);

  const Endpoint endpoint = parse_endpoint(o.endpoint);
  const MockConfig mock_cfg{p.cfg.sep_token, o.mock_sentences};

  std::vector<std::string> rows;
  std::ostringstream table;
  table << "n_s  epsilon  m_max  rouge1  rouge2  rougeL\n";
  for (const std::size_t n_s : ns_values) {
    for (const double epsilon : epsilon_values) {
      for (const std::size_t m_max : mmax_values) {
        const ExtractionConfig cell{n_s, epsilon, m_max};
        std::vector<SummarizeRequest> requests;
        requests.reserve(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) {
          ControlSpec spec;
          spec.keywords = select_inference_keywords(docs[i].tokens, docs[i].sentences,
                                                    docs[i].probs, cell, &p.stopwords);
          const FormattedInput fi = format_input(spec, docs[i].source_text, p.cfg.sep_token);
          requests.push_back(SummarizeRequest{corpus[i].id, fi.encoder_text, fi.decoder_prefix});
        }
        const std::vector<SummarizeResponse> responses =
            summarize_batch(endpoint, requests, o.max_in_flight, o.timeout_s, mock_cfg);
        std::vector<Prediction> predictions;
        predictions.reserve(responses.size());
        for (const SummarizeResponse& r : responses) {
          predictions.push_back(Prediction{r.id, r.summary, {}});
        }
        const EvalReport report = evaluate_run(predictions, corpus, {"rouge"});
        nlohmann::json row = {{"n_s", n_s},
                              {"epsilon", epsilon},
                              {"m_max", m_max},
                              {"rouge1", *report.values.at("rouge1")},
                              {"rouge2", *report.values.at("rouge2")},
                              {"rougeL", *report.values.at("rougeL")}};
        rows.push_back(row.dump());
        char buffer[96];
        std::snprintf(buffer, sizeof buffer, "%-4zu %-8.3f %-6zu %.4f  %.4f  %.4f", n_s, epsilon,
                      m_max, *report.values.at("rouge1"), *report.values.at("rouge2"),
                      *report.values.at("rougeL"));
        table << buffer << "\n";
      }
    }
  }
  atomic_write(o.out, jsonl(rows));
  log_line("sweep: " + std::to_string(rows.size()) + " grid cells -> " + o.out);
  std::cout << table.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"controllable summarization toolkit"};
  app.require_subcommand(1);

  CommonOpts common;

  ExtractOpts extract_opts;
  CLI::App* extract = app.add_subcommand("extract", "oracle keywords from reference summaries");
  extract->add_option("--in", extract_opts.in, "corpus JSONL")->required();
  extract->add_option("--out", extract_opts.out, "keyword JSONL")->required();
  extract->add_option("--limit", extract_opts.limit, "read at most N examples");
  extract->add_option("--max-oracle-sentences", extract_opts.max_oracle_sentences,
                      "cap on greedily selected sentences (0 = none)");
  add_common_options(extract, common);

  TagDataOpts tag_opts;
  CLI::App* tag = app.add_subcommand("tag-data", "token/label training data for a tagger");
  tag->add_option("--in", tag_opts.in, "corpus JSONL")->required();
  tag->add_option("--out", tag_opts.out, "tagger training JSONL")->required();
  tag->add_option("--limit", tag_opts.limit, "read at most N examples");
  add_common_options(tag, common);

  BucketsOpts buckets_opts;
  CLI::App* buckets = app.add_subcommand("buckets", "length-bucket table from a corpus");
  buckets->add_option("--in", buckets_opts.in, "corpus JSONL")->required();
  buckets->add_option("--out", buckets_opts.out, "bucket table JSON")->required();
  buckets->add_option("--limit", buckets_opts.limit, "read at most N examples");
  add_common_options(buckets, common);

  SelectOpts select_opts;
  CLI::App* select = app.add_subcommand("select-keywords", "keywords from tagger probabilities");
  select->add_option("--in", select_opts.in, "corpus JSONL")->required();
  select->add_option("--probs", select_opts.probs, "tagger probability JSONL")->required();
  select->add_option("--out", select_opts.out, "keyword JSONL")->required();
  select->add_option("--limit", select_opts.limit, "read at most N examples");
  select->add_option("--length-bucket", select_opts.length_bucket,
                     "length-controlled selection for bucket code 0..4");
  select->add_option("--buckets", select_opts.buckets_path, "bucket table JSON");
  select->add_flag("--no-dedup", select_opts.no_dedup, "keep duplicate keyword instances");
  select->add_option("--length-sentence-prefilter", select_opts.length_sentence_prefilter,
                     "restrict length selection to the top-N sentences (0 = whole document)");
  add_common_options(select, common);

  FormatOpts format_opts;
  CLI::App* format = app.add_subcommand("format", "assemble model inputs from control tokens");
  format->add_option("--in", format_opts.in, "corpus JSONL")->required();
  format->add_option("--out", format_opts.out, "formatted JSONL")->required();
  format->add_option("--keywords", format_opts.keywords_path, "keyword JSONL");
  format->add_flag("--entities", format_opts.entities, "use each example's entities as control");
  format->add_option("--prompt", format_opts.prompt_kind, "contribution, purpose, or qa");
  format->add_option("--prompt-mode", format_opts.prompt_mode,
                     "prefix_and_keywords, prefix_only, or keywords_only");
  format->add_flag("--compact-prompts", format_opts.compact_prompts,
                   "emit raw prompt strings instead of pre-tokenized ones");
  format->add_flag("--with-target", format_opts.with_target,
                   "include the truncated reference as the target");
  format->add_option("--limit", format_opts.limit, "read at most N examples");
  add_common_options(format, common);

  SummarizeOpts summarize_opts;
  CLI::App* summarize = app.add_subcommand("summarize", "run inputs through an endpoint");
  summarize->add_option("--in", summarize_opts.in, "formatted JSONL")->required();
  summarize->add_option("--out", summarize_opts.out, "summary JSONL")->required();
  summarize->add_option("--endpoint", summarize_opts.endpoint,
                        "mock, cmd:<command>, or tcp:<host>:<port>");
  summarize->add_option("--max-in-flight", summarize_opts.max_in_flight,
                        "max outstanding requests");
  summarize->add_option("--timeout", summarize_opts.timeout_s, "inactivity timeout in seconds");
  summarize->add_option("--mock-sentences", summarize_opts.mock_sentences,
                        "sentences the mock emits per summary");
  add_common_options(summarize, common);

  EvaluateOpts evaluate_opts;
  CLI::App* evaluate = app.add_subcommand("evaluate", "score summaries against a corpus");
  evaluate->add_option("--in", evaluate_opts.in, "summary JSONL")->required();
  evaluate->add_option("--corpus", evaluate_opts.corpus, "corpus JSONL")->required();
  evaluate->add_option("--aspects", evaluate_opts.aspects,
                       "comma list of rouge, success_rate, length, qa");
  evaluate->add_option("--buckets", evaluate_opts.buckets_path, "bucket table JSON");
  evaluate->add_option("--requested-codes", evaluate_opts.requested_path,
                       "JSONL {\"id\", \"bucket\"} of requested length codes");
  evaluate->add_option("--out", evaluate_opts.out, "report JSON (default: stdout)");
  add_common_options(evaluate, common);

  SweepOpts sweep_opts;
  CLI::App* sweep = app.add_subcommand("sweep", "grid of extraction settings -> ROUGE table");
  sweep->add_option("--in", sweep_opts.in, "corpus JSONL")->required();
  sweep->add_option("--probs", sweep_opts.probs, "tagger probability JSONL")->required();
  sweep->add_option("--out", sweep_opts.out, "per-cell JSONL")->required();
  sweep->add_option("--endpoint", sweep_opts.endpoint, "mock, cmd:<command>, or tcp:<host>:<port>");
  sweep->add_option("--ns-grid", sweep_opts.ns_csv, "comma list of n_s values");
  sweep->add_option("--epsilon-grid", sweep_opts.epsilon_csv, "comma list of epsilon values");
  sweep->add_option("--mmax-grid", sweep_opts.mmax_csv, "comma list of m_max values");
  sweep->add_option("--limit", sweep_opts.limit, "read at most N examples");
  sweep->add_option("--max-in-flight", sweep_opts.max_in_flight, "max outstanding requests");
  sweep->add_option("--timeout", sweep_opts.timeout_s, "inactivity timeout in seconds");
  sweep->add_option("--mock-sentences", sweep_opts.mock_sentences,
                    "sentences the mock emits per summary");
  add_common_options(sweep, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints contextual help on stdout, returns 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  try {
    if (extract->parsed()) return run_extract(extract_opts, common);
    if (tag->parsed()) return run_tag_data(tag_opts, common);
    if (buckets->parsed()) return run_buckets(buckets_opts, common);
    if (select->parsed()) return run_select(select_opts, common);
    if (format->parsed()) return run_format(format_opts, common);
    if (summarize->parsed()) return run_summarize(summarize_opts, common);
    if (evaluate->parsed()) return run_evaluate(evaluate_opts, common);
    if (sweep->parsed()) return run_sweep(sweep_opts, common);
  } catch (const BridgeError& e) {
    log_line(std::string("endpoint error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log_line(std::string("error: ") + e.what());
    return 1;
  }
  std::cerr << "error: no subcommand given\n\n" << app.help() << std::flush;
  return 1;
}
