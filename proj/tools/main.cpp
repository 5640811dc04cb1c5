// SPDX-License-Identifier: Apache-2.0
//
// eegpipe command line: synthetic data generation, preprocessing, DE
// feature extraction, montage adjacency, training, evaluation, ERP
// analysis, and a one-shot pipeline. Exit codes: 0 success, 1 usage or
// config error, 2 data error, 3 internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "eegpipe/core/io.hpp"
#include "eegpipe/core/preprocess.hpp"
#include "eegpipe/features/de.hpp"
#include "eegpipe/features/erp.hpp"
#include "eegpipe/geometry/adjacency.hpp"
#include "eegpipe/nn/checkpoint.hpp"
#include "eegpipe/nn/train.hpp"
#include "eegpipe/synth/generator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eegpipe;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------- plumbing

std::uint64_t fnv1a_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot hash missing file " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

// Collects files written as <final>.tmp and renames them all when every
// stage step succeeded, so failures never leave partial outputs behind.
class OutputCommit {
  public:
    fs::path stage(const fs::path& final_path) {
        pending_.emplace_back(final_path.string() + ".tmp", final_path);
        return pending_.back().first;
    }
    void commit() {
        for (auto& [tmp, final_path] : pending_) fs::rename(tmp, final_path);
        pending_.clear();
    }
    ~OutputCommit() {
        std::error_code ec;
        for (auto& [tmp, final_path] : pending_) fs::remove(tmp, ec);
    }

  private:
    std::vector<std::pair<fs::path, fs::path>> pending_;
};

class Manifest {
  public:
    Manifest(std::string command, std::uint64_t seed) {
        doc_["command"] = std::move(command);
        doc_["version"] = kVersion;
        doc_["seed"] = seed;
        doc_["config"] = json::object();
        doc_["timings_ms"] = json::object();
        doc_["outputs"] = json::object();
    }
    template <typename T>
    void config(const std::string& key, const T& value) {
        doc_["config"][key] = value;
    }
    void timing(const std::string& stage, double ms) { doc_["timings_ms"][stage] = ms; }
    void output(const fs::path& path) {
        doc_["outputs"][path.filename().string()] = hex64(fnv1a_file(path));
    }
    void write(const fs::path& path) const {
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp);
            out << doc_.dump(2) << '\n';
        }
        fs::rename(tmp, path);
    }
    json& raw() { return doc_; }

  private:
    json doc_;
};

class StageTimer {
  public:
    explicit StageTimer(Manifest& m, std::string stage)
        : manifest_(m), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const auto dt = std::chrono::steady_clock::now() - start_;
        manifest_.timing(stage_, std::chrono::duration<double, std::milli>(dt).count());
    }

  private:
    Manifest& manifest_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

void require_dir(const fs::path& dir, const std::string& what) {
    if (!fs::is_directory(dir))
        throw ParseError(what + " directory " + dir.string() + " does not exist");
}

json read_meta(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("missing metadata file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("bad metadata " + path.string() + ": " + e.what());
    }
    return j;
}

std::vector<features::BandDefinition> parse_bands(const std::vector<std::string>& specs) {
    if (specs.empty()) return features::default_bands();
    std::vector<features::BandDefinition> bands;
    for (const auto& s : specs) {
        const auto c1 = s.find(':');
        const auto c2 = s.find(':', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw InvalidConfig("band spec '" + s + "' is not name:low:high");
        try {
            bands.push_back({s.substr(0, c1), std::stod(s.substr(c1 + 1, c2 - c1 - 1)),
                             std::stod(s.substr(c2 + 1))});
        } catch (const std::exception&) {
            throw InvalidConfig("band spec '" + s + "' has bad numbers");
        }
    }
    features::validate_bands(bands);
    return bands;
}

// --------------------------------------------------------- option bundles

struct GenerateOptions {
    std::string out;
    int classes = 3;
    int segments = 200;
    int channels = 8;
    double rate = 128.0;
    double gain = 4.0;
    double noise_floor = 0.1;
    std::uint64_t seed = 0;
};

struct PreprocessOptions {
    std::string data;
    double rate = 0.0;         // 0: read from raw/meta.json
    double target_rate = 0.0;  // 0: keep input rate
    double band_lo = 0.5, band_hi = 50.0;
    int order = 4;
    double var_factor = 25.0;
    double flat_eps = 1e-12;
};

struct FeatureOptions {
    std::string data;
    std::vector<std::string> band_specs;
    double window_s = 1.0;
    int order = 4;
    int threads = 1;
};

struct AdjacencyOptions {
    std::string montage = "standard62";
    std::string out;
    int k = 0;  // 0: default_k(n)
    bool no_global_pairs = false;
};

struct TrainOptions {
    std::string data;
    std::string arch = "bilstm-attwg";
    nn::TrainConfig cfg;
    int seq_len = 5;
};

struct EvalOptions {
    std::string data;
    std::string checkpoint;
    std::string split = "all";  // all | val | train
    int seq_len = 5;
    double split_fraction = 0.8;
};

struct ErpOptions {
    std::string input, markers, marker_label;
    double rate = 200.0;
    double pre_ms = 100.0, post_ms = 500.0;
    double window_lo = 250.0, window_hi = 400.0;
    double lowpass_hz = 0.0;  // 0: off
    // synthetic mode
    bool synth = false;
    double latency_ms = 300.0, amplitude = 10.0, noise_sd = 0.5;
    std::uint64_t seed = 0;
    std::string out;
};

// ------------------------------------------------------------- stage code

synth::SynthConfig build_synth_config(const GenerateOptions& o) {
    if (o.classes < 2 || o.classes > 5)
        throw InvalidConfig("classes must lie in [2, 5], got " + std::to_string(o.classes));
    synth::SynthConfig cfg;
    // dominant bands in order: gamma, alpha, theta, beta, delta
    const int dominants[5] = {4, 2, 1, 3, 0};
    const char* names[5] = {"vigorous", "neutral", "passive", "tense", "drowsy"};
    for (int k = 0; k < o.classes; ++k) {
        std::vector<double> gains(5, 1.0);
        gains[static_cast<std::size_t>(dominants[k])] = o.gain;
        cfg.profiles.push_back({k, names[k], gains});
    }
    cfg.channels = o.channels;
    cfg.rate = o.rate;
    cfg.segments_per_class = o.segments;
    cfg.noise_floor = o.noise_floor;
    cfg.seed = derive_seed(o.seed, "generate");
    return cfg;
}

void run_generate(const GenerateOptions& o, Manifest& manifest) {
    StageTimer timer(manifest, "generate");
    const fs::path out(o.out);
    require_dir(out, "output");
    const synth::SynthConfig cfg = build_synth_config(o);
    cfg.validate();

    fs::create_directories(out / "raw");
    OutputCommit commit;
    std::vector<fs::path> written;

    // name synthetic channels after the leading montage electrodes
    std::vector<core::ChannelLabel> labels;
    if (cfg.channels <= 62) {
        const auto layout = geometry::standard_62_layout();
        for (int c = 0; c < cfg.channels; ++c)
            labels.push_back({layout.positions[static_cast<std::size_t>(c)].label.name, c});
    } else {
        labels = core::default_labels(cfg.channels);
    }

    for (const auto& profile : cfg.profiles) {
        core::Recording rec = synth::generate_recording(cfg, profile.class_id);
        rec.labels = labels;
        const fs::path csv = out / "raw" / ("class_" + std::to_string(profile.class_id) + ".csv");
        const fs::path mk =
            out / "raw" / ("class_" + std::to_string(profile.class_id) + ".markers");
        core::write_recording_csv(rec, commit.stage(csv));
        core::write_markers(rec, commit.stage(mk));
        written.push_back(csv);
        written.push_back(mk);
    }

    {
        std::ofstream labels(commit.stage(out / "labels.csv"));
        long index = 0;
        for (const auto& profile : cfg.profiles)
            for (int s = 0; s < cfg.segments_per_class; ++s)
                labels << index++ << ',' << profile.class_id << '\n';
        written.push_back(out / "labels.csv");
    }
    {
        json meta;
        meta["rate"] = cfg.rate;
        meta["classes"] = o.classes;
        meta["channels"] = cfg.channels;
        meta["segments_per_class"] = cfg.segments_per_class;
        std::ofstream mf(commit.stage(out / "raw" / "meta.json"));
        mf << meta.dump(2) << '\n';
        written.push_back(out / "raw" / "meta.json");
    }
    commit.commit();
    for (const auto& p : written) manifest.output(p);
}

void run_preprocess(const PreprocessOptions& o, Manifest& manifest) {
    StageTimer timer(manifest, "preprocess");
    const fs::path data(o.data);
    require_dir(data / "raw", "raw data");
    const json meta = read_meta(data / "raw" / "meta.json");
    const double rate = o.rate > 0.0 ? o.rate : meta.at("rate").get<double>();
    const int classes = meta.at("classes").get<int>();

    fs::create_directories(data / "proc");
    OutputCommit commit;
    std::vector<fs::path> written;
    double out_rate = rate;
    int out_channels = 0;

    for (int k = 0; k < classes; ++k) {
        const fs::path in_csv = data / "raw" / ("class_" + std::to_string(k) + ".csv");
        const fs::path in_mk = data / "raw" / ("class_" + std::to_string(k) + ".markers");
        core::Recording rec = core::read_recording_csv(in_csv, rate, in_mk);

        if (o.target_rate > 0.0 && o.target_rate != rec.rate)
            rec = core::downsample(rec, o.target_rate);
        const auto bad = core::detect_bad_channels(rec, o.var_factor, o.flat_eps);
        if (!bad.empty()) {
            std::cerr << "preprocess: dropping " << bad.size() << " bad channel(s) in class " << k
                      << '\n';
            rec = core::remove_channels(rec, bad);
        }
        rec = core::rereference_common_average(rec);
        rec = core::filter(rec, core::FilterSpec::band_pass(o.band_lo, o.band_hi, o.order));

        const fs::path out_csv = data / "proc" / ("class_" + std::to_string(k) + ".csv");
        core::write_recording_csv(rec, commit.stage(out_csv));
        written.push_back(out_csv);
        out_rate = rec.rate;
        out_channels = static_cast<int>(rec.channels());
    }
    {
        json out_meta = meta;
        out_meta["rate"] = out_rate;
        out_meta["channels"] = out_channels;
        std::ofstream mf(commit.stage(data / "proc" / "meta.json"));
        mf << out_meta.dump(2) << '\n';
        written.push_back(data / "proc" / "meta.json");
    }
    commit.commit();
    for (const auto& p : written) manifest.output(p);
}

void write_feature_csv(const features::FeatureSequence& fs_seq,
                       const std::vector<core::ChannelLabel>& labels,
                       const std::vector<features::BandDefinition>& bands,
                       const fs::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw ParseError("cannot open " + path.string() + " for writing");
    std::fputs("t,channel,band,de\n", f);
    for (long t = 0; t < fs_seq.steps; ++t)
        for (long c = 0; c < fs_seq.channels; ++c)
            for (long b = 0; b < fs_seq.bands; ++b)
                std::fprintf(f, "%ld,%s,%s,%.17g\n", t,
                             labels[static_cast<std::size_t>(c)].name.c_str(),
                             bands[static_cast<std::size_t>(b)].name.c_str(), fs_seq.at(t, c, b));
    std::fclose(f);
}

features::FeatureSequence read_feature_csv(const fs::path& path,
                                           const std::vector<std::string>& channel_names,
                                           const std::vector<std::string>& band_names,
                                           int steps) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,channel,band,de", 0) != 0)
        throw ParseError("bad feature header in " + path.string());

    std::map<std::string, long> cidx, bidx;
    for (std::size_t i = 0; i < channel_names.size(); ++i)
        cidx[channel_names[i]] = static_cast<long>(i);
    for (std::size_t i = 0; i < band_names.size(); ++i) bidx[band_names[i]] = static_cast<long>(i);

    features::FeatureSequence fs_seq;
    fs_seq.steps = steps;
    fs_seq.channels = static_cast<long>(channel_names.size());
    fs_seq.bands = static_cast<long>(band_names.size());
    fs_seq.values.assign(
        static_cast<std::size_t>(fs_seq.steps * fs_seq.channels * fs_seq.bands), 0.0);

    long rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string ts, cs, bs, vs;
        if (!std::getline(ss, ts, ',') || !std::getline(ss, cs, ',') ||
            !std::getline(ss, bs, ',') || !std::getline(ss, vs))
            throw ParseError("bad feature row in " + path.string());
        long t;
        double v;
        try {
            t = std::stol(ts);
            v = std::stod(vs);
        } catch (const std::exception&) {
            throw ParseError("bad feature numbers in " + path.string());
        }
        auto ci = cidx.find(cs);
        auto bi = bidx.find(bs);
        if (ci == cidx.end() || bi == bidx.end() || t < 0 || t >= fs_seq.steps)
            throw ParseError("feature row outside expected grid in " + path.string());
        fs_seq.at(t, ci->second, bi->second) = v;
        ++rows;
    }
    if (rows != fs_seq.steps * fs_seq.channels * fs_seq.bands)
        throw ParseError("feature file " + path.string() + " has " + std::to_string(rows) +
                         " rows, expected " +
                         std::to_string(fs_seq.steps * fs_seq.channels * fs_seq.bands));
    return fs_seq;
}

void run_features(const FeatureOptions& o, Manifest& manifest) {
    StageTimer timer(manifest, "features");
    const fs::path data(o.data);
    require_dir(data / "proc", "preprocessed data");
    const json meta = read_meta(data / "proc" / "meta.json");
    const double rate = meta.at("rate").get<double>();
    const int classes = meta.at("classes").get<int>();
    const auto bands = parse_bands(o.band_specs);

    fs::create_directories(data / "features");
    OutputCommit commit;
    std::vector<fs::path> written;
    int steps_per_class = 0;
    std::vector<std::string> channel_names;

    for (int k = 0; k < classes; ++k) {
        const fs::path in_csv = data / "proc" / ("class_" + std::to_string(k) + ".csv");
        core::Recording rec = core::read_recording_csv(in_csv, rate);
        auto segments = core::segment(rec, o.window_s, k, "class-" + std::to_string(k));
        features::FeatureSequence fs_seq =
            features::extract_de_features(segments, bands, o.order, o.threads);

        const fs::path out_csv = data / "features" / ("class_" + std::to_string(k) + ".csv");
        write_feature_csv(fs_seq, rec.labels, bands, commit.stage(out_csv));
        written.push_back(out_csv);
        steps_per_class = static_cast<int>(fs_seq.steps);
        if (k == 0)
            for (const auto& l : rec.labels) channel_names.push_back(l.name);
    }
    {
        json fmeta;
        fmeta["classes"] = classes;
        fmeta["steps_per_class"] = steps_per_class;
        fmeta["window_s"] = o.window_s;
        fmeta["channels"] = channel_names;
        json jbands = json::array();
        for (const auto& b : bands)
            jbands.push_back({{"name", b.name}, {"low_hz", b.low_hz}, {"high_hz", b.high_hz}});
        fmeta["bands"] = jbands;
        std::ofstream mf(commit.stage(data / "features" / "meta.json"));
        mf << fmeta.dump(2) << '\n';
        written.push_back(data / "features" / "meta.json");
    }
    commit.commit();
    for (const auto& p : written) manifest.output(p);
}

void run_adjacency(const AdjacencyOptions& o, Manifest& manifest) {
    StageTimer timer(manifest, "adjacency");
    geometry::MontageLayout layout = o.montage == "standard62"
                                         ? geometry::standard_62_layout()
                                         : geometry::load_layout(o.montage);
    const int k = o.k > 0 ? o.k : geometry::default_k(static_cast<int>(layout.size()));
    geometry::AdjacencyMatrix adj = geometry::knn_adjacency(layout, k);
    if (!o.no_global_pairs) adj = geometry::apply_global_pairs(adj, layout, geometry::global_pairs());
    adj.validate();

    const fs::path out(o.out);
    if (out.has_parent_path()) require_dir(out.parent_path(), "output");
    OutputCommit commit;
    geometry::write_adjacency_csv(adj, commit.stage(out));
    commit.commit();
    manifest.config("k", k);
    manifest.output(out);
}

// Feature sequences per class, sliced into fixed-length training samples.
std::vector<features::FeatureSequence> load_training_sequences(const fs::path& data,
                                                               int seq_len) {
    const json meta = read_meta(data / "features" / "meta.json");
    const int classes = meta.at("classes").get<int>();
    const int steps = meta.at("steps_per_class").get<int>();
    const auto channel_names = meta.at("channels").get<std::vector<std::string>>();
    std::vector<std::string> band_names;
    for (const auto& b : meta.at("bands")) band_names.push_back(b.at("name").get<std::string>());

    std::vector<features::FeatureSequence> all;
    for (int k = 0; k < classes; ++k) {
        const fs::path csv = data / "features" / ("class_" + std::to_string(k) + ".csv");
        features::FeatureSequence fs_seq =
            read_feature_csv(csv, channel_names, band_names, steps);
        fs_seq.class_label = k;
        for (auto& run : features::slice_sequences(fs_seq, seq_len)) all.push_back(std::move(run));
    }
    if (all.empty()) throw InsufficientData("no training sequences; check seq-len vs steps");
    return all;
}

void print_metrics(std::ostream& os, const nn::Metrics& m) {
    os << "accuracy " << m.accuracy << '\n'
       << "macro_precision " << m.macro_precision << '\n'
       << "macro_recall " << m.macro_recall << '\n'
       << "macro_f1 " << m.macro_f1 << '\n';
}

void write_metrics_file(const fs::path& path, const nn::Metrics& m, const std::string& arch,
                        long params, int best_epoch) {
    std::ofstream out(path);
    out.precision(17);
    out << "arch " << arch << '\n' << "param_count " << params << '\n';
    if (best_epoch > 0) out << "best_epoch " << best_epoch << '\n';
    out << "accuracy " << m.accuracy << '\n'
        << "macro_precision " << m.macro_precision << '\n'
        << "macro_recall " << m.macro_recall << '\n'
        << "macro_f1 " << m.macro_f1 << '\n';
    out << "confusion";
    for (long i = 0; i < m.confusion.rows(); ++i)
        for (long j = 0; j < m.confusion.cols(); ++j) out << ' ' << m.confusion(i, j);
    out << '\n';
}

void run_train(const TrainOptions& o, Manifest& manifest) {
    StageTimer timer(manifest, "train");
    const fs::path data(o.data);
    require_dir(data / "features", "feature data");
    auto dataset = load_training_sequences(data, o.seq_len);

    nn::TrainConfig cfg = o.cfg;
    cfg.seed = derive_seed(o.cfg.seed, "train");
    const nn::Arch arch = nn::parse_arch(o.arch);
    nn::TrainResult result = nn::train(dataset, arch, cfg);

    fs::create_directories(data / "model");
    OutputCommit commit;
    const fs::path ckpt = data / "model" / "checkpoint.bin";
    const fs::path metrics_path = data / "model" / "metrics.txt";
    const fs::path history_path = data / "model" / "loss_history.csv";

    nn::save_checkpoint(result.model, o.cfg.seed, commit.stage(ckpt));
    write_metrics_file(commit.stage(metrics_path), result.metrics, o.arch,
                       nn::param_count(result.model), result.best_epoch);
    {
        std::ofstream hist(commit.stage(history_path));
        hist.precision(17);
        hist << "epoch,train_loss,val_loss,val_accuracy\n";
        for (const auto& e : result.metrics.history)
            hist << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_accuracy
                 << '\n';
    }
    commit.commit();
    for (const fs::path& p : {ckpt, metrics_path, history_path}) manifest.output(p);
    manifest.config("param_count", nn::param_count(result.model));
    manifest.config("best_epoch", result.best_epoch);

    print_metrics(std::cout, result.metrics);
    std::cout << "best_epoch " << result.best_epoch << '\n';
}

void run_eval(const EvalOptions& o, Manifest& manifest) {
    StageTimer timer(manifest, "eval");
    const fs::path data(o.data);
    require_dir(data / "features", "feature data");
    auto loaded = nn::load_checkpoint(o.checkpoint);
    auto sequences = load_training_sequences(data, o.seq_len);
    auto samples = nn::to_samples(sequences);

    std::vector<nn::Sample> subset;
    if (o.split == "all") {
        subset = samples;
    } else if (o.split == "val" || o.split == "train") {
        std::vector<int> labels;
        for (const auto& s : samples) labels.push_back(s.label);
        const auto idx = nn::stratified_split(labels, o.split_fraction,
                                              derive_seed(loaded.seed, "train"));
        for (std::size_t i : (o.split == "val" ? idx.val : idx.train))
            subset.push_back(samples[i]);
    } else {
        throw InvalidConfig("--split must be all, val or train");
    }

    const nn::Metrics m = nn::evaluate(loaded.model, subset);
    print_metrics(std::cout, m);
    manifest.config("split", o.split);
    manifest.config("samples", subset.size());
}

void run_erp(const ErpOptions& o, Manifest& manifest) {
    StageTimer timer(manifest, "erp");
    struct Row {
        std::string channel;
        double latency_ms, amplitude;
    };
    std::vector<Row> rows;

    if (o.synth) {
        auto epoch = synth::generate_erp_epoch(o.rate, o.pre_ms, o.post_ms, o.latency_ms,
                                               o.amplitude, o.noise_sd,
                                               derive_seed(o.seed, "erp"));
        auto comps =
            features::detect_p300(epoch.segment, epoch.stimulus_index, o.window_lo, o.window_hi);
        for (const auto& c : comps) rows.push_back({c.channel.name, c.latency_ms, c.amplitude});
    } else {
        if (o.input.empty()) throw InvalidConfig("either --synth or --input is required");
        core::Recording rec = core::read_recording_csv(o.input, o.rate, o.markers);
        if (o.lowpass_hz > 0.0)
            rec = core::filter(rec, core::FilterSpec::low_pass(o.lowpass_hz, 4));
        const long pre = std::lround(o.pre_ms / 1000.0 * rec.rate);
        const long post = std::lround(o.post_ms / 1000.0 * rec.rate);
        long epochs = 0;
        for (const auto& marker : rec.markers) {
            if (!o.marker_label.empty() && marker.label != o.marker_label) continue;
            const long start = marker.sample_index - pre;
            if (start < 0 || marker.sample_index + post > rec.length()) continue;
            core::Segment epoch;
            epoch.rate = rec.rate;
            epoch.samples = rec.samples.middleCols(start, pre + post);
            epoch = core::baseline_correct(epoch, (pre - std::lround(0.05 * rec.rate)) / rec.rate,
                                           pre / rec.rate);
            auto comps = features::detect_p300(epoch, pre, o.window_lo, o.window_hi, rec.labels);
            for (const auto& c : comps)
                rows.push_back({c.channel.name, c.latency_ms, c.amplitude});
            ++epochs;
        }
        if (epochs == 0) throw InvalidConfig("no usable epochs around the given markers");
    }

    std::ostringstream table;
    table << "channel,latency_ms,amplitude\n";
    table.precision(17);
    for (const auto& r : rows)
        table << r.channel << ',' << r.latency_ms << ',' << r.amplitude << '\n';
    std::cout << table.str();
    if (!o.out.empty()) {
        OutputCommit commit;
        {
            std::ofstream out(commit.stage(o.out));
            out << table.str();
        }
        commit.commit();
        manifest.output(o.out);
    }
}

// -------------------------------------------------------------------- main

int dispatch(int argc, char** argv) {
    CLI::App app{"EEG emotion-recognition pipeline: synthetic data, preprocessing, "
                 "differential-entropy features, montage adjacency, and a Bi-LSTM "
                 "classifier with attention"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (INI format, [subcommand] sections)");
    app.set_version_flag("--version", kVersion);

    GenerateOptions gen;
    PreprocessOptions pre;
    FeatureOptions feat;
    AdjacencyOptions adj;
    TrainOptions trn;
    EvalOptions evl;
    ErpOptions erp;
    std::uint64_t seed = 0;
    int threads = 1;
    bool dry_run = false;
    std::string pipeline_out;

    auto* c_gen = app.add_subcommand("generate", "Generate a labeled synthetic EEG dataset");
    c_gen->add_option("--out", gen.out, "Output directory (must exist)")->required();
    c_gen->add_option("--classes", gen.classes, "Number of classes")->capture_default_str();
    c_gen->add_option("--segments", gen.segments, "Segments per class")->capture_default_str();
    c_gen->add_option("--channels", gen.channels, "Channel count")->capture_default_str();
    c_gen->add_option("--rate", gen.rate, "Sampling rate in Hz")->capture_default_str();
    c_gen->add_option("--gain", gen.gain, "Dominant band power gain")->capture_default_str();
    c_gen->add_option("--noise-floor", gen.noise_floor, "Broadband noise amplitude")
        ->capture_default_str();
    c_gen->add_option("--seed", gen.seed, "Random seed")->capture_default_str();

    auto* c_pre = app.add_subcommand("preprocess", "Re-reference, filter and clean recordings");
    c_pre->add_option("--data", pre.data, "Dataset directory")->required();
    c_pre->add_option("--rate", pre.rate, "Input rate (default: raw/meta.json)");
    c_pre->add_option("--target-rate", pre.target_rate, "Decimate to this rate");
    c_pre->add_option("--band-low", pre.band_lo, "Band-pass low cutoff")->capture_default_str();
    c_pre->add_option("--band-high", pre.band_hi, "Band-pass high cutoff")->capture_default_str();
    c_pre->add_option("--order", pre.order, "Filter order (even)")->capture_default_str();
    c_pre->add_option("--var-factor", pre.var_factor, "Bad channel variance factor")
        ->capture_default_str();
    c_pre->add_option("--flat-eps", pre.flat_eps, "Flat channel variance floor")
        ->capture_default_str();

    auto* c_feat = app.add_subcommand("features", "Extract differential-entropy band features");
    c_feat->add_option("--data", feat.data, "Dataset directory")->required();
    c_feat->add_option("--band", feat.band_specs,
                       "Band as name:low:high (repeatable; default: the five rhythm bands)");
    c_feat->add_option("--window", feat.window_s, "Segment window in seconds")
        ->capture_default_str();
    c_feat->add_option("--order", feat.order, "Band filter order")->capture_default_str();
    c_feat->add_option("--threads", feat.threads, "Worker threads")->capture_default_str();

    auto* c_adj = app.add_subcommand("adjacency", "Build the channel connectivity matrix");
    c_adj->add_option("--montage", adj.montage, "standard62 or a label,x,y,z file")
        ->capture_default_str();
    c_adj->add_option("--out", adj.out, "Output CSV path")->required();
    c_adj->add_option("--k", adj.k, "Neighbours to keep (default: 20% of channels)");
    c_adj->add_flag("--no-global-pairs", adj.no_global_pairs,
                    "Skip the 9 hemispheric pair increments");

    auto* c_trn = app.add_subcommand("train", "Train a sequence classifier on DE features");
    c_trn->add_option("--data", trn.data, "Dataset directory")->required();
    c_trn->add_option("--arch", trn.arch,
                      "lstm|bilstm|bilstm-attw|bilstm-attg|bilstm-attwg")
        ->capture_default_str();
    c_trn->add_option("--epochs", trn.cfg.epochs, "Training epochs")->capture_default_str();
    c_trn->add_option("--batch", trn.cfg.batch_size, "Batch size")->capture_default_str();
    c_trn->add_option("--lr", trn.cfg.learning_rate, "Learning rate")->capture_default_str();
    c_trn->add_option("--dropout", trn.cfg.dropout_rate, "Dropout rate")->capture_default_str();
    c_trn->add_option("--hidden", trn.cfg.hidden_size, "Hidden units per direction")
        ->capture_default_str();
    c_trn->add_option("--split", trn.cfg.split, "Train fraction")->capture_default_str();
    c_trn->add_option("--clip", trn.cfg.clip_norm, "Gradient clip norm (<=0 off)")
        ->capture_default_str();
    c_trn->add_option("--seq-len", trn.seq_len, "Segments per training sequence")
        ->capture_default_str();
    c_trn->add_option("--seed", trn.cfg.seed, "Random seed")->capture_default_str();
    c_trn->add_option("--threads", trn.cfg.threads, "Worker threads")->capture_default_str();

    auto* c_evl = app.add_subcommand("eval", "Evaluate a checkpoint on stored features");
    c_evl->add_option("--data", evl.data, "Dataset directory")->required();
    c_evl->add_option("--checkpoint", evl.checkpoint, "Checkpoint file")->required();
    c_evl->add_option("--split", evl.split, "all|val|train")->capture_default_str();
    c_evl->add_option("--seq-len", evl.seq_len, "Segments per sequence")->capture_default_str();
    c_evl->add_option("--split-fraction", evl.split_fraction, "Train fraction used at training")
        ->capture_default_str();

    auto* c_erp = app.add_subcommand("erp", "P300 latency and peak extraction");
    c_erp->add_flag("--synth", erp.synth, "Use a synthetic epoch with known ground truth");
    c_erp->add_option("--input", erp.input, "Recording CSV (file mode)");
    c_erp->add_option("--markers", erp.markers, "Markers sidecar (file mode)");
    c_erp->add_option("--marker-label", erp.marker_label, "Only use markers with this label");
    c_erp->add_option("--rate", erp.rate, "Sampling rate in Hz")->capture_default_str();
    c_erp->add_option("--pre", erp.pre_ms, "Epoch start before stimulus, ms")
        ->capture_default_str();
    c_erp->add_option("--post", erp.post_ms, "Epoch end after stimulus, ms")
        ->capture_default_str();
    c_erp->add_option("--window-low", erp.window_lo, "Search window start, ms")
        ->capture_default_str();
    c_erp->add_option("--window-high", erp.window_hi, "Search window end, ms")
        ->capture_default_str();
    c_erp->add_option("--lowpass", erp.lowpass_hz, "Optional low-pass cutoff, Hz (0 = off)")
        ->capture_default_str();
    c_erp->add_option("--latency", erp.latency_ms, "Injected latency, ms (synth)")
        ->capture_default_str();
    c_erp->add_option("--amplitude", erp.amplitude, "Injected amplitude (synth)")
        ->capture_default_str();
    c_erp->add_option("--noise", erp.noise_sd, "Noise SD (synth)")->capture_default_str();
    c_erp->add_option("--seed", erp.seed, "Random seed (synth)")->capture_default_str();
    c_erp->add_option("--out", erp.out, "Write the component table here");

    auto* c_pipe = app.add_subcommand(
        "pipeline", "generate -> preprocess -> features -> adjacency -> train -> eval");
    c_pipe->add_option("--out", pipeline_out, "Working directory (must exist)")->required();
    c_pipe->add_option("--seed", seed, "Seed for every stage")->capture_default_str();
    c_pipe->add_option("--classes", gen.classes, "Number of classes")->capture_default_str();
    c_pipe->add_option("--segments", gen.segments, "Segments per class")->capture_default_str();
    c_pipe->add_option("--channels", gen.channels, "Channel count")->capture_default_str();
    c_pipe->add_option("--rate", gen.rate, "Sampling rate in Hz")->capture_default_str();
    c_pipe->add_option("--gain", gen.gain, "Dominant band power gain")->capture_default_str();
    c_pipe->add_option("--arch", trn.arch, "Classifier architecture")->capture_default_str();
    c_pipe->add_option("--epochs", trn.cfg.epochs, "Training epochs")->capture_default_str();
    c_pipe->add_option("--hidden", trn.cfg.hidden_size, "Hidden units")->capture_default_str();
    c_pipe->add_option("--seq-len", trn.seq_len, "Segments per sequence")->capture_default_str();
    c_pipe->add_option("--threads", threads, "Worker threads")->capture_default_str();
    c_pipe->add_flag("--dry-run", dry_run, "Validate the configuration and write nothing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    }

    // exit codes: 1 usage/config, 2 data, 3 internal
    auto guard = [](const std::string& stage, auto&& fn) -> int {
        auto fail = [&stage](const std::exception& e, int code) {
            std::cerr << stage << ": " << e.what() << '\n';
            return code;
        };
        try {
            fn();
            return 0;
        } catch (const ParseError& e) {
            return fail(e, 2);
        } catch (const DegenerateSignal& e) {
            return fail(e, 2);
        } catch (const InsufficientData& e) {
            return fail(e, 2);
        } catch (const EmptyDataset& e) {
            return fail(e, 2);
        } catch (const NoPeak& e) {
            return fail(e, 2);
        } catch (const Error& e) {
            return fail(e, 1);
        } catch (const std::exception& e) {
            std::cerr << stage << ": internal error: " << e.what() << '\n';
            return 3;
        }
    };

    if (c_gen->parsed()) {
        return guard("generate", [&] {
            Manifest m("generate", gen.seed);
            m.config("classes", gen.classes);
            m.config("segments", gen.segments);
            m.config("channels", gen.channels);
            m.config("rate", gen.rate);
            run_generate(gen, m);
            m.write(fs::path(gen.out) / "manifest-generate.json");
        });
    }
    if (c_pre->parsed()) {
        return guard("preprocess", [&] {
            Manifest m("preprocess", 0);
            m.config("band_low", pre.band_lo);
            m.config("band_high", pre.band_hi);
            m.config("order", pre.order);
            run_preprocess(pre, m);
            m.write(fs::path(pre.data) / "manifest-preprocess.json");
        });
    }
    if (c_feat->parsed()) {
        return guard("features", [&] {
            Manifest m("features", 0);
            m.config("window_s", feat.window_s);
            run_features(feat, m);
            m.write(fs::path(feat.data) / "manifest-features.json");
        });
    }
    if (c_adj->parsed()) {
        return guard("adjacency", [&] {
            Manifest m("adjacency", 0);
            m.config("montage", adj.montage);
            run_adjacency(adj, m);
            const fs::path out(adj.out);
            m.write(out.parent_path() / "manifest-adjacency.json");
        });
    }
    if (c_trn->parsed()) {
        return guard("train", [&] {
            Manifest m("train", trn.cfg.seed);
            m.config("arch", trn.arch);
            m.config("epochs", trn.cfg.epochs);
            m.config("hidden", trn.cfg.hidden_size);
            m.config("seq_len", trn.seq_len);
            run_train(trn, m);
            m.write(fs::path(trn.data) / "manifest-train.json");
        });
    }
    if (c_evl->parsed()) {
        return guard("eval", [&] {
            Manifest m("eval", 0);
            run_eval(evl, m);
            m.write(fs::path(evl.data) / "manifest-eval.json");
        });
    }
    if (c_erp->parsed()) {
        return guard("erp", [&] {
            Manifest m("erp", erp.seed);
            run_erp(erp, m);
            if (!erp.out.empty())
                m.write(fs::path(erp.out).parent_path() / "manifest-erp.json");
        });
    }
    if (c_pipe->parsed()) {
        const fs::path out(pipeline_out);
        // stage configs share the pipeline seed
        gen.out = pipeline_out;
        gen.seed = seed;
        pre.data = pipeline_out;
        feat.data = pipeline_out;
        feat.threads = threads;
        adj.out = (out / "adjacency.csv").string();
        trn.data = pipeline_out;
        trn.cfg.seed = seed;
        trn.cfg.threads = threads;
        evl.data = pipeline_out;
        evl.checkpoint = (out / "model" / "checkpoint.bin").string();

        if (dry_run) {
            return guard("pipeline", [&] {
                require_dir(out, "working");
                build_synth_config(gen).validate();
                trn.cfg.validate();
                nn::parse_arch(trn.arch);
                std::cout << "pipeline: configuration valid, nothing written\n";
            });
        }

        Manifest m("pipeline", seed);
        m.config("classes", gen.classes);
        m.config("segments", gen.segments);
        m.config("channels", gen.channels);
        m.config("rate", gen.rate);
        m.config("arch", trn.arch);
        m.config("epochs", trn.cfg.epochs);
        m.config("hidden", trn.cfg.hidden_size);
        m.config("seq_len", trn.seq_len);
        m.config("threads", threads);

        const std::pair<std::string, std::function<void()>> stages[] = {
            {"generate", [&] { run_generate(gen, m); }},
            {"preprocess", [&] { run_preprocess(pre, m); }},
            {"features", [&] { run_features(feat, m); }},
            {"adjacency", [&] { run_adjacency(adj, m); }},
            {"train", [&] { run_train(trn, m); }},
            {"eval", [&] { run_eval(evl, m); }},
        };
        for (const auto& [name, fn] : stages) {
            const int rc = guard(name, fn);
            if (rc != 0) {
                std::cerr << "pipeline: stage '" << name << "' failed\n";
                return rc;
            }
        }
        return guard("pipeline", [&] { m.write(out / "manifest-pipeline.json"); });
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
