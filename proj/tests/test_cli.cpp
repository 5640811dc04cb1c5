// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the command line binary. argv[1] is the path to the
// eegpipe executable.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string g_cli;
int g_failures = 0;
int g_checks = 0;

void check(bool ok, const std::string& what) {
    ++g_checks;
    if (!ok) {
        ++g_failures;
        std::cerr << "FAIL: " << what << '\n';
    }
}

struct RunResult {
    int code;
    std::string out;
};

RunResult run(const std::string& args, const fs::path& capture_dir) {
    static int counter = 0;
    const fs::path log = capture_dir / ("cli-out-" + std::to_string(counter++) + ".log");
    const std::string cmd = g_cli + " " + args + " >" + log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = (raw == -1) ? -1 : WEXITSTATUS(raw);
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "eegpipe-cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

double metric_from(const std::string& text, const std::string& key) {
    std::stringstream ss(text);
    std::string k;
    double v;
    while (ss >> k >> v)
        if (k == key) return v;
    return -1.0;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_tests <path-to-eegpipe>\n";
        return 2;
    }
    g_cli = argv[1];
    const fs::path scratch = fresh_dir("scratch");

    // --help lists the subcommands; unknown flags are hard errors
    {
        auto help = run("--help", scratch);
        check(help.code == 0, "--help exits 0");
        for (const char* sub :
             {"generate", "preprocess", "features", "adjacency", "train", "eval", "erp",
              "pipeline"})
            check(contains(help.out, sub), std::string("--help mentions ") + sub);

        auto sub_help = run("generate --help", scratch);
        check(sub_help.code == 0, "generate --help exits 0");
        check(contains(sub_help.out, "--seed"), "generate --help lists --seed");

        auto unknown = run("generate --out x --no-such-flag", scratch);
        check(unknown.code == 1, "unknown flag exits 1");
        auto no_sub = run("", scratch);
        check(no_sub.code == 1, "missing subcommand exits 1");
    }

    // generate: missing output directory fails without partial files
    {
        const fs::path missing = fs::temp_directory_path() / "eegpipe-cli" / "does-not-exist";
        fs::remove_all(missing);
        auto r = run("generate --out " + missing.string() + " --segments 10", scratch);
        check(r.code == 2, "generate into a missing directory exits 2");
        check(!fs::exists(missing), "no partial files created");
    }

    // a small dataset end to end, stage by stage
    const fs::path data = fresh_dir("stages");
    {
        auto gen = run("generate --out " + data.string() +
                           " --classes 3 --segments 20 --channels 4 --rate 128 --seed 7",
                       scratch);
        check(gen.code == 0, "generate exits 0");
        for (int k = 0; k < 3; ++k)
            check(fs::exists(data / "raw" / ("class_" + std::to_string(k) + ".csv")),
                  "recording file for class " + std::to_string(k));
        check(fs::exists(data / "labels.csv"), "labels.csv written");
        check(fs::exists(data / "manifest-generate.json"), "generate manifest written");

        // labels file: 60 lines of segment_index,class_id
        std::ifstream labels(data / "labels.csv");
        int lines = 0;
        std::string line;
        while (std::getline(labels, line)) ++lines;
        check(lines == 60, "labels.csv has one row per segment");

        // determinism: the same invocation produces identical recordings
        const fs::path data2 = fresh_dir("stages2");
        run("generate --out " + data2.string() +
                " --classes 3 --segments 20 --channels 4 --rate 128 --seed 7",
            scratch);
        check(file_bytes(data / "raw" / "class_0.csv") ==
                  file_bytes(data2 / "raw" / "class_0.csv"),
              "generate is deterministic");
    }
    {
        auto pre = run("preprocess --data " + data.string(), scratch);
        check(pre.code == 0, "preprocess exits 0");
        check(fs::exists(data / "proc" / "class_0.csv"), "preprocessed recording exists");
    }
    {
        auto feat = run("features --data " + data.string(), scratch);
        check(feat.code == 0, "features exits 0");
        check(fs::exists(data / "features" / "class_2.csv"), "feature file exists");
        std::ifstream f(data / "features" / "class_0.csv");
        std::string header;
        std::getline(f, header);
        check(header == "t,channel,band,de", "feature header matches the format");
    }
    {
        auto adj = run("adjacency --montage standard62 --out " + (data / "adjacency.csv").string(),
                       scratch);
        check(adj.code == 0, "adjacency exits 0");
        std::ifstream f(data / "adjacency.csv");
        std::string header;
        std::getline(f, header);
        check(contains(header, "FP1") && contains(header, "CB2"),
              "adjacency header carries channel labels");
        int rows = 0;
        std::string line;
        while (std::getline(f, line)) ++rows;
        check(rows == 62, "adjacency has 62 data rows");
    }
    {
        auto trn = run("train --data " + data.string() +
                           " --arch bilstm-attwg --epochs 6 --hidden 16 --seq-len 2 --seed 5",
                       scratch);
        check(trn.code == 0, "train exits 0");
        check(contains(trn.out, "accuracy"), "train prints metrics");
        check(fs::exists(data / "model" / "checkpoint.bin"), "checkpoint written");
        check(fs::exists(data / "model" / "metrics.txt"), "metrics file written");
        check(fs::exists(data / "model" / "loss_history.csv"), "loss history written");
    }
    {
        auto evl = run("eval --data " + data.string() + " --checkpoint " +
                           (data / "model" / "checkpoint.bin").string() + " --seq-len 2",
                       scratch);
        check(evl.code == 0, "eval exits 0");
        check(metric_from(evl.out, "accuracy") >= 0.0, "eval prints accuracy");

        auto evl_val = run("eval --data " + data.string() + " --checkpoint " +
                               (data / "model" / "checkpoint.bin").string() +
                               " --seq-len 2 --split val",
                           scratch);
        check(evl_val.code == 0, "eval --split val exits 0");
    }
    {
        auto erp = run("erp --synth --latency 300 --amplitude 10 --noise 0.2 --seed 3", scratch);
        check(erp.code == 0, "erp --synth exits 0");
        check(contains(erp.out, "channel,latency_ms,amplitude"), "erp prints the table header");
    }

    // config file values apply; explicit flags win over the config
    {
        const fs::path cfg = scratch / "run.ini";
        std::ofstream(cfg) << "[train]\nepochs=3\nhidden=8\nseq-len=2\nseed=5\n";
        auto from_cfg = run("--config " + cfg.string() + " train --data " + data.string(),
                            scratch);
        check(from_cfg.code == 0, "train with config file exits 0");
        std::ifstream hist(data / "model" / "loss_history.csv");
        int rows = -1;  // minus the header
        std::string line;
        while (std::getline(hist, line)) ++rows;
        check(rows == 3, "config file sets the epoch count");

        auto overridden = run("--config " + cfg.string() + " train --data " + data.string() +
                                  " --epochs 2",
                              scratch);
        check(overridden.code == 0, "train with config + flag exits 0");
        std::ifstream hist2(data / "model" / "loss_history.csv");
        rows = -1;
        while (std::getline(hist2, line)) ++rows;
        check(rows == 2, "explicit flag beats the config file");
    }

    // corrupt intermediate file: the failing stage is named, exit code 2
    {
        const fs::path broken = fresh_dir("broken");
        run("generate --out " + broken.string() + " --segments 10 --channels 3 --seed 1",
            scratch);
        std::ofstream(broken / "raw" / "class_1.csv") << "time,CH1\ngarbage-line\n";
        auto pre = run("preprocess --data " + broken.string(), scratch);
        check(pre.code == 2, "preprocess on a corrupt file exits 2");
        check(contains(pre.out, "preprocess"), "error message names the stage");
    }

    // pipeline: dry run writes nothing, a real run produces the full tree
    {
        const fs::path pout = fresh_dir("pipe");
        auto dry = run("pipeline --out " + pout.string() + " --seed 7 --dry-run", scratch);
        check(dry.code == 0, "pipeline --dry-run exits 0");
        check(fs::is_empty(pout), "dry run writes nothing");

        auto pipe = run("pipeline --out " + pout.string() +
                            " --seed 7 --segments 20 --channels 4 --epochs 4 --hidden 8" +
                            " --seq-len 2 --threads 1",
                        scratch);
        check(pipe.code == 0, "pipeline exits 0");
        check(fs::exists(pout / "model" / "metrics.txt"), "pipeline produces metrics");
        check(fs::exists(pout / "adjacency.csv"), "pipeline produces adjacency");
        check(fs::exists(pout / "manifest-pipeline.json"), "pipeline manifest written");
    }

    std::cout << (g_checks - g_failures) << "/" << g_checks << " CLI checks passed\n";
    return g_failures == 0 ? 0 : 1;
}
