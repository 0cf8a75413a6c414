// Copyright 2026 The scenesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line driver over the scenesim C API.

#include "scenesim/scenesim.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// One machine-parseable line per failure: "error: <kind>: <message>".
int fail(ssim_status status)
{
  std::cerr << "error: " << ssim_status_name(status) << ": " << ssim_last_error() << "\n";
  return kExitRuntime;
}

int usage(const std::string & message)
{
  std::cerr << "error: usage: " << message << "\n";
  return kExitUsage;
}

// Owns a string returned by the C API.
std::string take(char * s)
{
  std::string out(s ? s : "");
  ssim_string_free(s);
  return out;
}

std::optional<std::string> read_text(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ConfigHandle
{
  ssim_config * ptr{nullptr};
  ~ConfigHandle() { ssim_config_free(ptr); }
};

struct CorpusHandle
{
  ssim_corpus * ptr{nullptr};
  ~CorpusHandle() { ssim_corpus_free(ptr); }
};

struct VocabHandle
{
  ssim_vocab * ptr{nullptr};
  ~VocabHandle() { ssim_vocab_free(ptr); }
};

struct RunHandle
{
  ssim_run * ptr{nullptr};
  ~RunHandle() { ssim_run_free(ptr); }
};

ssim_status open_config(const std::string & path, ConfigHandle & h)
{
  return path.empty() ? ssim_config_create(&h.ptr) : ssim_config_load(path.c_str(), &h.ptr);
}

struct GenCorpusArgs
{
  int count{-1};
  std::uint64_t seed{1};
  std::string config;
  std::string out;
};

int cmd_gen_corpus(const GenCorpusArgs & a)
{
  std::string text;
  if (!a.config.empty()) {
    auto t = read_text(a.config);
    if (!t) {
      std::cerr << "error: io_error: cannot read " << a.config << "\n";
      return kExitRuntime;
    }
    text = *t;
  }
  CorpusHandle corpus;
  if (ssim_status st = ssim_corpus_synthesize(a.config.empty() ? nullptr : text.c_str(), a.count, a.seed, &corpus.ptr)) {
    return fail(st);
  }
  if (ssim_status st = ssim_corpus_write_dir(corpus.ptr, a.out.c_str())) return fail(st);
  std::cout << "scenarios=" << ssim_corpus_size(corpus.ptr) << " out=" << a.out << "\n";
  return kExitOk;
}

struct BuildVocabArgs
{
  std::size_t k{1024};
  std::uint64_t seed{1};
  std::string config;
  std::string out;
};

int cmd_build_vocab(const BuildVocabArgs & a)
{
  ConfigHandle config;
  if (ssim_status st = open_config(a.config, config)) return fail(st);
  VocabHandle vocab;
  if (ssim_status st = ssim_vocab_build(config.ptr, a.k, a.seed, &vocab.ptr)) return fail(st);
  if (ssim_status st = ssim_vocab_save(vocab.ptr, a.out.c_str())) return fail(st);
  std::cout << "entries=" << ssim_vocab_size(vocab.ptr) << " out=" << a.out << "\n";
  return kExitOk;
}

struct GenerateArgs
{
  std::string corpus;
  std::uint64_t corpus_seed{1};
  std::string config;
  std::string vocab;
  std::optional<std::string> expert;
  std::optional<int> rounds;
  bool non_reactive{false};
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
};

int cmd_generate(const GenerateArgs & a)
{
  ConfigHandle config;
  if (ssim_status st = open_config(a.config, config)) return fail(st);
  // Flags override the config file.
  std::ostringstream patch;
  patch << "{";
  const char * sep = "";
  if (a.expert) {
    patch << sep << "\"expert\":\"" << *a.expert << "\"";
    sep = ",";
  }
  if (a.rounds) {
    patch << sep << "\"rounds\":" << *a.rounds;
    sep = ",";
  }
  if (a.non_reactive) {
    patch << sep << "\"reactive\":false";
    sep = ",";
  }
  if (a.seed) {
    patch << sep << "\"master_seed\":" << *a.seed;
    sep = ",";
  }
  if (a.workers) {
    patch << sep << "\"workers\":" << *a.workers;
  }
  patch << "}";
  if (ssim_status st = ssim_config_patch(config.ptr, patch.str().c_str())) return fail(st);

  CorpusHandle corpus;
  ssim_status st = a.corpus.empty() ? ssim_corpus_synthesize(nullptr, -1, a.corpus_seed, &corpus.ptr)
                                    : ssim_corpus_load_dir(a.corpus.c_str(), &corpus.ptr);
  if (st) return fail(st);
  VocabHandle vocab;
  if (!a.vocab.empty()) {
    if ((st = ssim_vocab_load(a.vocab.c_str(), &vocab.ptr))) return fail(st);
  }
  RunHandle run;
  if ((st = ssim_generate(corpus.ptr, vocab.ptr, config.ptr, &run.ptr))) return fail(st);
  if ((st = ssim_run_export(run.ptr, a.out.c_str()))) return fail(st);
  std::cout << "samples=" << ssim_run_sample_count(run.ptr) << " out=" << a.out << "\n";
  return kExitOk;
}

struct EvalArgs
{
  std::string scenario;
  std::string trajectory;
  std::string mode{"reactive"};
  std::optional<std::size_t> start;
  std::string config;
  std::string out;
};

int cmd_eval(const EvalArgs & a)
{
  ConfigHandle config;
  if (ssim_status st = open_config(a.config, config)) return fail(st);
  char * report = nullptr;
  if (ssim_status st = ssim_eval_trajectory(
        a.scenario.c_str(), a.trajectory.c_str(), a.mode.c_str(), a.start.value_or(SSIM_START_AT_HISTORY),
        config.ptr, &report)) {
    return fail(st);
  }
  const std::string text = take(report);
  if (!a.out.empty()) {
    std::ofstream f(a.out, std::ios::binary);
    f << text << "\n";
    if (!f) {
      std::cerr << "error: io_error: cannot write " << a.out << "\n";
      return kExitRuntime;
    }
  }
  std::cout << text << "\n";
  return kExitOk;
}

struct FitArgs
{
  std::vector<std::string> points;
  std::string out;
};

int cmd_fit_scaling(const FitArgs & a)
{
  std::vector<std::string> labels;
  std::vector<std::string> paths;
  for (const std::string & p : a.points) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) {
      labels.push_back(std::filesystem::path(p).stem().string());
      paths.push_back(p);
    } else {
      if (eq == 0 || eq + 1 == p.size()) return usage("--points expects label=path, got '" + p + "'");
      labels.push_back(p.substr(0, eq));
      paths.push_back(p.substr(eq + 1));
    }
  }
  std::vector<const char *> lp;
  std::vector<const char *> pp;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    lp.push_back(labels[i].c_str());
    pp.push_back(paths[i].c_str());
  }
  char * report = nullptr;
  if (ssim_status st = ssim_scaling_report(lp.data(), pp.data(), lp.size(), a.out.c_str(), &report)) {
    return fail(st);
  }
  std::cout << take(report) << "\n";
  return kExitOk;
}

struct StatsArgs
{
  std::string dataset;
  std::string corpus;
  std::string config;
};

int cmd_stats(const StatsArgs & a)
{
  ConfigHandle config;
  if (ssim_status st = open_config(a.config, config)) return fail(st);
  CorpusHandle corpus;
  if (!a.corpus.empty()) {
    if (ssim_status st = ssim_corpus_load_dir(a.corpus.c_str(), &corpus.ptr)) return fail(st);
  }
  char * out = nullptr;
  if (ssim_status st = ssim_dataset_stats(a.dataset.c_str(), corpus.ptr, config.ptr, &out)) return fail(st);
  std::cout << take(out) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Pseudo-expert scene simulation and scaling analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ssim_version()));

  GenCorpusArgs gc;
  auto * gen_corpus = app.add_subcommand("gen-corpus", "Synthesize a scenario corpus");
  gen_corpus->add_option("--count", gc.count, "Number of scenarios (default: configured template counts)");
  gen_corpus->add_option("--seed", gc.seed, "Corpus seed");
  gen_corpus->add_option("--config", gc.config, "Corpus config JSON");
  gen_corpus->add_option("--out", gc.out, "Output directory")->required();

  BuildVocabArgs bv;
  auto * build_vocab = app.add_subcommand("build-vocab", "Cluster a trajectory vocabulary");
  build_vocab->add_option("--k", bv.k, "Vocabulary size");
  build_vocab->add_option("--seed", bv.seed, "Clustering seed");
  build_vocab->add_option("--config", bv.config, "Pipeline config JSON");
  build_vocab->add_option("--out", bv.out, "Output vocabulary JSON")->required();

  GenerateArgs ge;
  auto * generate = app.add_subcommand("generate", "Run the two-stage data generation");
  generate->add_option("--corpus", ge.corpus, "Scenario directory (default: synthesized corpus)");
  generate->add_option("--corpus-seed", ge.corpus_seed, "Seed of the synthesized corpus");
  generate->add_option("--config", ge.config, "Pipeline config JSON");
  generate->add_option("--vocab", ge.vocab, "Perturbation vocabulary JSON (default: built from config)");
  generate->add_option("--expert", ge.expert, "Pseudo-expert kind")->check(CLI::IsMember({"recovery", "planner"}));
  generate->add_option("--rounds", ge.rounds, "Sampling rounds");
  generate->add_flag("--non-reactive", ge.non_reactive, "Skip the reactive feasibility check");
  generate->add_option("--seed", ge.seed, "Master seed");
  generate->add_option("--workers", ge.workers, "Scenario-level worker threads");
  generate->add_option("--out", ge.out, "Output directory")->required();

  EvalArgs ev;
  auto * eval = app.add_subcommand("eval", "Score a trajectory against a scenario");
  eval->add_option("--scenario", ev.scenario, "Scenario JSON")->required();
  eval->add_option("--trajectory", ev.trajectory, "Trajectory JSON")->required();
  eval->add_option("--mode", ev.mode, "Rollout mode")->check(CLI::IsMember({"reactive", "non-reactive"}));
  eval->add_option("--start", ev.start, "Start frame (default: end of history)");
  eval->add_option("--config", ev.config, "Pipeline config JSON");
  eval->add_option("--out", ev.out, "Also write the report here");

  FitArgs fa;
  auto * fit = app.add_subcommand("fit-scaling", "Fit log-quadratic scaling curves");
  fit->add_option("--points", fa.points, "label=path of an n,s CSV (repeatable)")->required();
  fit->add_option("--out", fa.out, "Output directory")->required();

  StatsArgs sa;
  auto * stats = app.add_subcommand("stats", "Summarize an exported dataset");
  stats->add_option("--dataset", sa.dataset, "dataset.jsonl")->required();
  stats->add_option("--corpus", sa.corpus, "Scenario directory for re-verification");
  stats->add_option("--config", sa.config, "Pipeline config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    return usage(e.what());
  }

  if (*gen_corpus) return cmd_gen_corpus(gc);
  if (*build_vocab) return cmd_build_vocab(bv);
  if (*generate) return cmd_generate(ge);
  if (*eval) return cmd_eval(ev);
  if (*fit) return cmd_fit_scaling(fa);
  if (*stats) return cmd_stats(sa);
  return usage("no command given");
}
