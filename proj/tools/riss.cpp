// riss: paraphrase mining, idiom data preparation and simplification metrics.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riss/riss.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Key-value config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", opts.overrides, "Override a config key (key=value); repeatable")
      ->allow_extra_args(false);
}

riss::PipelineConfig resolve_config(const CommonOptions& opts) {
  auto cfg = opts.config_path.empty() ? riss::PipelineConfig{} : riss::PipelineConfig::load_file(opts.config_path);
  for (const auto& o : opts.overrides) riss::apply_override(cfg, o);
  return cfg;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw riss::Error("cannot write '" + path + "'");
  out << content;
}

std::ifstream open(const std::string& path) { return riss::detail::open_input(path); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"riss: readability-guided paraphrase mining, idiom-aware data preparation and SARI/BLEU evaluation"};
  app.set_version_flag("--version", std::string(riss::kVersion));
  app.require_subcommand(1);

  CommonOptions common;
  std::string in_path, out_path, csv_path, report_path, dict_path, errors_path, prompts_path, simplify_path;
  std::string mode = "css";
  std::size_t count = 100, length = 40;

  auto input = [&](CLI::App* cmd, const std::string& what) {
    auto* pos = cmd->add_option("input", in_path, what);
    auto* flag = cmd->add_option("--in", in_path, what);
    pos->excludes(flag);
    flag->excludes(pos);
  };

  auto* score = app.add_subcommand("score", "Write the per-pair feature table (RSRS, diff, similarities)");
  add_common(score, common);
  input(score, "Pair corpus (JSONL)");
  score->add_option("--out", out_path, "Feature table JSONL (default stdout)");
  score->add_option("--csv", csv_path, "Also write the feature table as CSV");

  auto* mine = app.add_subcommand("mine", "Select high-quality pairs: orient, filter, bin, gate");
  add_common(mine, common);
  input(mine, "Pair corpus (JSONL)");
  mine->add_option("--out", out_path, "Kept pairs JSONL (default stdout)");
  mine->add_option("--report", report_path, "Selection report JSON");
  mine->add_option("--csv", csv_path, "Feature table CSV of the post-filter pairs");

  auto* prep = app.add_subcommand("idiom-prep", "Parse CIP records, build the idiom dictionary, emit prompts");
  add_common(prep, common);
  input(prep, "CIP records (TSV with header or JSONL; fields source, target, optional id)");
  prep->add_option("--out", out_path, "Idiom records JSONL (default stdout)");
  prep->add_option("--dict", dict_path, "Idiom dictionary JSON");
  prep->add_option("--errors", errors_path, "Malformed-record sidecar JSONL");
  prep->add_option("--prompts", prompts_path, "Prompted multi-task training lines JSONL");
  prep->add_option("--simplify-corpus", simplify_path, "Pair corpus whose pairs join the prompted file as the simplification task")
      ->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "SARI (char and word) and BLEU over orig/sys/ref_1..ref_x rows");
  add_common(eval, common);
  input(eval, "Evaluation rows (TSV with header or JSONL)");
  eval->add_option("--mode", mode, "css: mean of per-sentence SARI; mcts: one corpus-level SARI")
      ->check(CLI::IsMember({"css", "mcts"}));
  eval->add_option("--out", out_path, "Report JSON (default stdout)");

  auto* loss = app.add_subcommand("loss-check", "Sentence, idiom and total losses over distribution tracks");
  add_common(loss, common);
  input(loss, "Distribution tracks JSONL (id, targets, probs, optional span)");
  loss->add_option("--out", out_path, "Loss table JSONL (default stdout)");

  auto* st = app.add_subcommand("stats", "Pearson correlations and paired t-test over a feature table");
  add_common(st, common);
  input(st, "Feature table JSONL written by 'score'");
  st->add_option("--out", out_path, "Report JSON (default stdout)");

  auto* synth = app.add_subcommand("synth", "Write a deterministic synthetic pair corpus (uses 'seed')");
  add_common(synth, common);
  synth->add_option("--count", count, "Number of pairs")->check(CLI::PositiveNumber);
  synth->add_option("--length", length, "Source length in characters")->check(CLI::Range(4, 10000));
  synth->add_option("--out", out_path, "Corpus JSONL (default stdout)");

  auto* show = app.add_subcommand("config", "Print the resolved config and its hash");
  add_common(show, common);
  for (auto* cmd : {score, mine, prep, eval, loss, st}) cmd->callback([cmd] {
      if (cmd->get_option("input")->count() == 0 && cmd->get_option("--in")->count() == 0)
        throw CLI::RequiredError("input (positional or --in)");
    });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    // Config problems surface before any input is read.
    const auto cfg = resolve_config(common);

    if (*score) {
      const auto pairs = riss::pipeline::load_corpus(in_path, cfg);
      const auto result = riss::pipeline::run_score(pairs, cfg);
      write_output(out_path, result.jsonl);
      if (!csv_path.empty()) write_output(csv_path, result.csv);
    } else if (*mine) {
      auto pairs = riss::pipeline::load_corpus(in_path, cfg);
      const auto result = riss::pipeline::run_mine(std::move(pairs), cfg);
      write_output(out_path, result.jsonl);
      if (!report_path.empty()) write_output(report_path, result.report);
      if (!csv_path.empty()) write_output(csv_path, result.csv);
      std::cerr << "mine: kept " << result.result.selection.report.kept.size() << " of "
                << result.result.selection.report.input_count << " pairs\n";
    } else if (*prep) {
      std::vector<riss::ParaphrasePair> simplify;
      if (!simplify_path.empty()) simplify = riss::pipeline::load_corpus(simplify_path, cfg);
      auto in = open(in_path);
      const auto result = riss::pipeline::run_idiom_prep(in, cfg, !prompts_path.empty(),
                                                         simplify_path.empty() ? nullptr : &simplify);
      write_output(out_path, result.records_jsonl);
      if (!dict_path.empty()) write_output(dict_path, result.dictionary_json);
      if (!errors_path.empty()) write_output(errors_path, result.errors_jsonl);
      if (!prompts_path.empty()) write_output(prompts_path, result.prompts_jsonl);
      if (result.failures > 0) {
        std::cerr << "idiom-prep: " << result.failures << " malformed record(s)"
                  << (errors_path.empty() ? "" : ", see " + errors_path) << "\n";
        if (errors_path.empty()) std::cerr << result.errors_jsonl;
        return 2;
      }
    } else if (*eval) {
      auto in = open(in_path);
      const auto instances = riss::pipeline::read_eval(in);
      const auto agg = mode == "css" ? riss::metrics::Aggregation::SentenceMean : riss::metrics::Aggregation::Corpus;
      const auto report = riss::pipeline::run_eval(instances, agg, cfg);
      if (!out_path.empty() && out_path != "-") std::cout << report.json;
      write_output(out_path, report.json);
    } else if (*loss) {
      auto in = open(in_path);
      const auto result = riss::pipeline::run_loss_check(in, cfg);
      write_output(out_path, result.jsonl);
      if (result.clamps > 0) std::cerr << "loss-check: " << result.clamps << " probability clamp event(s)\n";
    } else if (*st) {
      auto in = open(in_path);
      const auto records = riss::read_feature_table(in);
      write_output(out_path, riss::pipeline::run_stats(records, cfg));
    } else if (*show) {
      std::cout << cfg.dump() << "# config_hash = " << cfg.hash() << "\n";
    } else if (*synth) {
      write_output(out_path, riss::pipeline::run_synth(count, length, cfg));
    }
  } catch (const riss::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
