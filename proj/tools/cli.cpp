// tools/cli.cpp

// Copyright 2026  The abxeval Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <tuple>

#include <CLI11.hpp>
#include <json.hpp>

#include "abx/abxscore.hpp"
#include "abx/featureio.hpp"
#include "abx/itemgen.hpp"
#include "abx/mapeval.hpp"
#include "abx/perturb.hpp"
#include "abx/synthgen.hpp"
#include "abx/types.hpp"

namespace abx::cli {

namespace {

namespace fs = std::filesystem;

std::string default_out_dir() {
  const char* env = std::getenv("ABXEVAL_OUTPUT_DIR");
  return env ? env : ".";
}

std::vector<ContextMode> parse_contexts(const std::string& s) {
  if (s == "within") return {ContextMode::WithinContext};
  if (s == "without") return {ContextMode::WithoutContext};
  return {ContextMode::WithinContext, ContextMode::WithoutContext};
}

std::vector<SpeakerMode> parse_speakers(const std::string& s) {
  if (s == "within") return {SpeakerMode::WithinSpeaker};
  if (s == "across") return {SpeakerMode::AcrossSpeaker};
  return {SpeakerMode::WithinSpeaker, SpeakerMode::AcrossSpeaker};
}

std::vector<SeqDissim> parse_seqs(const std::string& s) {
  if (s == "dtw") return {SeqDissim::Dtw};
  if (s == "hamming") return {SeqDissim::HammingPool};
  return {SeqDissim::Dtw, SeqDissim::HammingPool};
}

FrameDissim parse_frame(const std::string& s) {
  return s == "kl" ? FrameDissim::KlDiv : FrameDissim::Angular;
}

void write_text_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "."
                                                    : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

struct CommonIo {
  std::string features;
  std::string alignments;
  std::string out = default_out_dir();
  double frame_period = kDefaultFramePeriod;
};

// ---------------------------------------------------------------------------

struct ItemsOpts {
  CommonIo io;
  std::string context = "both";
  std::string speaker = "both";
  std::uint64_t seed = 0;
  std::uint64_t max_triples = 0;
};

int cmd_items(const ItemsOpts& o) {
  auto segments = read_alignments(o.io.alignments);
  auto features = read_features(o.io.features, o.io.frame_period);
  fs::create_directories(o.io.out);

  for (ContextMode ctx : parse_contexts(o.context)) {
    ConditionSpec spec;
    spec.context_mode = ctx;
    spec.rng_seed = o.seed;
    spec.max_triples_per_task = o.max_triples;
    auto cells = build_cells(segments, features, spec);
    const std::string tag = to_string(ctx);
    write_item_file(cells, fs::path(o.io.out) / ("items_" + tag + ".tsv"));

    std::string stats = "phone\tprev\tnext\tspeaker\tn_tokens\n";
    for (const AbxCell& cell : cells) {
      stats += cell.key.phone + "\t" + cell.key.prev + "\t" + cell.key.next +
               "\t" + cell.key.speaker + "\t" +
               std::to_string(cell.tokens.size()) + "\n";
    }
    write_text_file(fs::path(o.io.out) / ("cells_" + tag + ".tsv"), stats);

    for (SpeakerMode spk : parse_speakers(o.speaker)) {
      spec.speaker_mode = spk;
      TaskSet tasks = enumerate_tasks(cells, spec);
      std::printf("%s %s: %zu cells, %zu tasks, %llu skipped\n", tag.c_str(),
                  to_string(spk).c_str(), cells.size(), tasks.tasks.size(),
                  static_cast<unsigned long long>(tasks.n_skipped));
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct AbxOpts {
  CommonIo io;
  std::string context = "both";
  std::string speaker = "both";
  std::string seq = "dtw";
  std::string frame = "angular";
  double epsilon = 1e-10;
  std::uint64_t max_triples = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string format = "both";
  std::string system = "system";
};

int cmd_abx(const AbxOpts& o) {
  auto segments = read_alignments(o.io.alignments);
  auto features = read_features(o.io.features, o.io.frame_period);
  fs::create_directories(o.io.out);

  FrameDissimSpec frame{parse_frame(o.frame), o.epsilon};
  EvalOptions opts;
  opts.workers = o.workers;

  std::string csv = report_csv_header();
  for (ContextMode ctx : parse_contexts(o.context)) {
    ConditionSpec spec;
    spec.context_mode = ctx;
    spec.max_triples_per_task = o.max_triples;
    spec.rng_seed = o.seed;
    auto cells = build_cells(segments, features, spec);
    for (SpeakerMode spk : parse_speakers(o.speaker)) {
      spec.speaker_mode = spk;
      for (SeqDissim seq : parse_seqs(o.seq)) {
        ScoreReport report = evaluate_abx(cells, spec, frame, seq, opts);
        csv += report_csv_row(report);
        if (o.format != "csv") {
          const std::string name = "report_" + to_string(ctx) + "_" +
                                   to_string(spk) + "_" + to_string(seq) +
                                   ".json";
          write_text_file(fs::path(o.io.out) / name,
                          report_to_json(report, o.system));
        }
        std::printf("%s %s %s %s: error %.2f%% (%llu tasks, %llu skipped)\n",
                    to_string(ctx).c_str(), to_string(spk).c_str(),
                    to_string(seq).c_str(), to_string(frame.kind).c_str(),
                    report.error_rate_percent,
                    static_cast<unsigned long long>(report.n_tasks),
                    static_cast<unsigned long long>(report.n_skipped));
      }
    }
  }
  if (o.format != "json") {
    write_text_file(fs::path(o.io.out) / "abx_report.csv", csv);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct MapOpts {
  CommonIo io;  // alignments = word alignments
  std::string frame = "angular";
  double epsilon = 1e-10;
  unsigned workers = 1;
  std::string format = "both";
  std::string system = "system";
};

int cmd_map(const MapOpts& o) {
  auto words = read_word_alignments(o.io.alignments);
  auto features = read_features(o.io.features, o.io.frame_period);
  fs::create_directories(o.io.out);

  FrameDissimSpec frame{parse_frame(o.frame), o.epsilon};
  auto tokens = build_word_tokens(features, words);
  MapResult result = map_score(tokens, frame, o.workers);

  if (o.format != "json") {
    write_text_file(fs::path(o.io.out) / "map_report.csv",
                    map_report_csv_header() +
                        map_report_csv_row(result, frame));
  }
  if (o.format != "csv") {
    write_text_file(fs::path(o.io.out) / "map_report.json",
                    map_report_to_json(result, frame, o.system));
  }
  std::printf("MAP %s: %.2f (%llu tokens, %llu same-type pairs)\n",
              to_string(frame.kind).c_str(), result.map_percent,
              static_cast<unsigned long long>(result.n_tokens),
              static_cast<unsigned long long>(result.n_same_pairs));
  return 0;
}

// ---------------------------------------------------------------------------

struct PerturbOpts {
  CommonIo io;
  bool one_hot = false;
  unsigned shift_k = 0;
  double shift_p = 0.5;
  unsigned filter_width = 1;
  std::uint64_t seed = 0;
};

int cmd_perturb(const PerturbOpts& o) {
  if (!o.one_hot && o.io.features.empty()) {
    throw ValidationError("perturb needs --features or --one-hot");
  }
  if ((o.one_hot || o.shift_k > 0) && o.io.alignments.empty()) {
    throw ValidationError(
        "perturb needs --alignments for --one-hot or --shift-k");
  }
  PerturbSpec spec;
  spec.shift_frames = o.shift_k;
  spec.shift_prob = o.shift_p;
  spec.filter_width = o.filter_width;
  spec.rng_seed = o.seed;
  spec.validate();

  FeatureMap features;
  double period = o.io.frame_period;
  if (!o.io.features.empty()) {
    features = read_features(o.io.features, o.io.frame_period);
    if (!features.empty()) period = features.begin()->second.frame_period_s;
  }

  std::vector<AlignmentSegment> segments;
  if (!o.io.alignments.empty()) segments = read_alignments(o.io.alignments);
  std::vector<AlignmentSegment> shifted =
      o.shift_k > 0 ? shift_boundaries_corpus(segments, spec, period)
                    : segments;

  if (o.one_hot) {
    features =
        one_hot_corpus(shifted, PhoneInventory::from_segments(segments),
                       period);
  }
  if (o.filter_width > 1) {
    for (auto& [id, m] : features) {
      m = square_filter(m, o.filter_width);
    }
  }

  fs::create_directories(o.io.out);
  write_features(features, fs::path(o.io.out) / "features.abxf");
  if (!segments.empty()) {
    write_alignments(shifted, fs::path(o.io.out) / "alignments.tsv");
  }
  std::printf("perturb: wrote %zu utterances%s\n", features.size(),
              o.shift_k > 0 ? " (boundaries shifted)" : "");
  return 0;
}

// ---------------------------------------------------------------------------

struct SynthOpts {
  std::string out = default_out_dir();
  SynthSpec spec;
};

int cmd_synth(const SynthOpts& o) {
  SynthCorpus corpus = generate(o.spec);
  fs::create_directories(o.out);
  write_features(corpus.features, fs::path(o.out) / "features.abxf");
  write_alignments(corpus.phone_alignments,
                   fs::path(o.out) / "alignments.tsv");
  write_alignments(corpus.word_alignments, fs::path(o.out) / "words.tsv",
                   "word");
  std::printf("synth: %zu utterances, %zu phone tokens, %zu word tokens\n",
              corpus.features.size(), corpus.phone_alignments.size(),
              corpus.word_alignments.size());
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportOpts {
  std::string in;
  std::string out;
};

int cmd_report(const ReportOpts& o) {
  std::vector<fs::path> files;
  if (!fs::is_directory(o.in)) {
    throw IoError("report input is not a directory: " + o.in);
  }
  for (const auto& entry : fs::directory_iterator(o.in)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  using RowKey = std::tuple<std::string, std::string, std::string,
                            std::string, std::string>;
  std::map<RowKey, std::string> rows;
  for (const fs::path& file : files) {
    std::ifstream in(file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw ParseError(file.string() + ": " + e.what());
    }
    if (!j.contains("config") || !j.contains("overall")) continue;  // not ABX
    const auto& cfg = j["config"];
    RowKey key{j.value("system", "system"), cfg.value("condition", ""),
               cfg.value("speaker_mode", ""), cfg.value("seq_dissim", ""),
               cfg.value("frame_dissim", "")};
    char err[64];
    std::snprintf(err, sizeof(err), "%.2f",
                  j["overall"]["error_percent"].get<double>());
    std::string row = std::get<0>(key) + "," + std::get<1>(key) + "," +
                      std::get<2>(key) + "," + std::get<3>(key) + "," +
                      std::get<4>(key) + "," + err + "," +
                      std::to_string(j["overall"]["n_tasks"].get<std::uint64_t>()) +
                      "," +
                      std::to_string(
                          j["overall"]["n_skipped"].get<std::uint64_t>()) +
                      "\n";
    if (!rows.emplace(key, row).second) {
      throw ValidationError("duplicate report for system '" +
                            std::get<0>(key) + "' (" + std::get<1>(key) +
                            ", " + std::get<2>(key) + ", " +
                            std::get<3>(key) + ")");
    }
  }
  if (rows.empty()) {
    throw IoError("no score reports found in " + o.in);
  }

  std::string csv =
      "system,condition,speaker_mode,seq_dissim,frame_dissim,error_percent,"
      "n_tasks,n_skipped\n";
  for (const auto& [key, row] : rows) csv += row;
  const fs::path out_path =
      o.out.empty() ? fs::path(o.in) / "grid.csv" : fs::path(o.out);
  write_text_file(out_path, csv);
  std::printf("report: %zu rows -> %s\n", rows.size(),
              out_path.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

void add_common_io(CLI::App* cmd, CommonIo* io, bool features_required,
                   bool alignments_required,
                   const std::string& alignments_name = "--alignments") {
  auto* f = cmd->add_option("--features", io->features,
                            "Feature archive or directory of .txt matrices");
  f->check(CLI::ExistingPath);
  if (features_required) f->required();
  auto* a = cmd->add_option(alignments_name, io->alignments,
                            "Alignment TSV file");
  a->check(CLI::ExistingFile);
  if (alignments_required) a->required();
  cmd->add_option("--out", io->out, "Output directory")
      ->default_val(default_out_dir());
  cmd->add_option("--frame-period", io->frame_period,
                  "Frame period in seconds for text feature directories");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Frame-level speech representation evaluation"};
  app.require_subcommand(1);

  ItemsOpts items;
  AbxOpts abx;
  MapOpts map_o;
  PerturbOpts perturb;
  SynthOpts synth;
  ReportOpts report;

  auto* items_cmd =
      app.add_subcommand("items", "Write evaluation item files and cell "
                                  "statistics");
  add_common_io(items_cmd, &items.io, true, true);
  items_cmd->add_option("--context", items.context, "within, without or both")
      ->check(CLI::IsMember({"within", "without", "both"}));
  items_cmd->add_option("--speaker", items.speaker, "within, across or both")
      ->check(CLI::IsMember({"within", "across", "both"}));
  items_cmd->add_option("--seed", items.seed, "Subsampling seed");
  items_cmd->add_option("--max-triples", items.max_triples,
                        "Triple cap per task (0 = unlimited)");

  auto* abx_cmd = app.add_subcommand("abx", "Run the phone discrimination "
                                            "evaluation");
  add_common_io(abx_cmd, &abx.io, true, true);
  abx_cmd->add_option("--context", abx.context, "within, without or both")
      ->check(CLI::IsMember({"within", "without", "both"}));
  abx_cmd->add_option("--speaker", abx.speaker, "within, across or both")
      ->check(CLI::IsMember({"within", "across", "both"}));
  abx_cmd->add_option("--seq-dissim", abx.seq, "dtw, hamming or both")
      ->check(CLI::IsMember({"dtw", "hamming", "both"}));
  abx_cmd->add_option("--frame-dissim", abx.frame, "angular or kl")
      ->check(CLI::IsMember({"angular", "kl"}));
  abx_cmd->add_option("--epsilon", abx.epsilon, "Distribution floor for kl");
  abx_cmd->add_option("--max-triples", abx.max_triples,
                      "Triple cap per task (0 = unlimited)");
  abx_cmd->add_option("--seed", abx.seed, "Subsampling seed");
  abx_cmd->add_option("--workers", abx.workers, "Worker thread count")
      ->check(CLI::PositiveNumber);
  abx_cmd->add_option("--format", abx.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  abx_cmd->add_option("--system", abx.system, "System name for reports");

  auto* map_cmd =
      app.add_subcommand("map", "Mean average precision on pooled word "
                                "embeddings");
  add_common_io(map_cmd, &map_o.io, true, true, "--word-alignments");
  map_cmd->add_option("--frame-dissim", map_o.frame, "angular or kl")
      ->check(CLI::IsMember({"angular", "kl"}));
  map_cmd->add_option("--epsilon", map_o.epsilon, "Distribution floor for kl");
  map_cmd->add_option("--workers", map_o.workers, "Worker thread count")
      ->check(CLI::PositiveNumber);
  map_cmd->add_option("--format", map_o.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  map_cmd->add_option("--system", map_o.system, "System name for reports");

  auto* perturb_cmd =
      app.add_subcommand("perturb", "Write perturbed features/alignments");
  add_common_io(perturb_cmd, &perturb.io, false, false);
  perturb_cmd->add_flag("--one-hot", perturb.one_hot,
                        "Encode gold one-hot frames from the alignments");
  perturb_cmd->add_option("--shift-k", perturb.shift_k,
                          "Rightward boundary shift in frames");
  perturb_cmd->add_option("--shift-p", perturb.shift_p,
                          "Per-boundary shift probability");
  perturb_cmd->add_option("--filter-width", perturb.filter_width,
                          "Odd smoothing window width (1 = identity)");
  perturb_cmd->add_option("--seed", perturb.seed, "Shift seed");

  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("--out", synth.out, "Output directory")
      ->default_val(default_out_dir());
  synth_cmd->add_option("--phones", synth.spec.n_phones, "Phone count");
  synth_cmd->add_option("--speakers", synth.spec.n_speakers, "Speaker count");
  synth_cmd->add_option("--utterances", synth.spec.n_utterances,
                        "Utterance count");
  synth_cmd->add_option("--phones-per-utterance",
                        synth.spec.phones_per_utterance,
                        "Tokens per utterance");
  synth_cmd->add_option("--dim", synth.spec.dim, "Feature dimension");
  synth_cmd->add_option("--gamma", synth.spec.context_coloring,
                        "Context coloring in [0, 1]");
  synth_cmd->add_option("--speaker-strength", synth.spec.speaker_strength,
                        "Speaker offset scale");
  synth_cmd->add_option("--sigma", synth.spec.noise_sigma,
                        "Frame noise sigma");
  synth_cmd->add_option("--min-frames", synth.spec.min_frames_per_phone,
                        "Min frames per phone");
  synth_cmd->add_option("--max-frames", synth.spec.max_frames_per_phone,
                        "Max frames per phone");
  synth_cmd->add_option("--frame-period", synth.spec.frame_period_s,
                        "Frame period in seconds");
  synth_cmd->add_option("--phones-per-word", synth.spec.phones_per_word,
                        "Phones grouped per pseudo-word");
  synth_cmd->add_flag("--shared-prototype", synth.spec.shared_prototype,
                      "All phones share one prototype");
  synth_cmd->add_option("--seed", synth.spec.rng_seed, "Generation seed");

  auto* report_cmd =
      app.add_subcommand("report", "Merge score report JSONs into one grid");
  report_cmd->add_option("--in", report.in, "Directory of report JSONs")
      ->required()
      ->check(CLI::ExistingDirectory);
  report_cmd->add_option("--out", report.out,
                         "Output CSV path (default <in>/grid.csv)");

  std::vector<const char*> argv;
  argv.push_back("abxeval");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()),
              const_cast<char**>(argv.data()));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (items_cmd->parsed()) return cmd_items(items);
    if (abx_cmd->parsed()) return cmd_abx(abx);
    if (map_cmd->parsed()) return cmd_map(map_o);
    if (perturb_cmd->parsed()) return cmd_perturb(perturb);
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (report_cmd->parsed()) return cmd_report(report);
  } catch (const EmptyEvaluationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

}  // namespace abx::cli
