// End-to-end checks of the installed command-line surface. Driven by ctest:
//   cli_smoke_tests <cli-path> <data-dir> <work-dir>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
    std::printf("%s %s\n", ok ? "[ok]" : "[FAIL]", what.c_str());
    if (!ok) ++g_failures;
}

std::string file_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run(const std::string& command) {
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 4) {
        std::cerr << "usage: cli_smoke_tests <cli> <data-dir> <work-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path data = argv[2];
    const fs::path work = argv[3];
    fs::remove_all(work);
    fs::create_directories(work);

    const std::string common = cli + " --registry " + (data / "registry.json").string() +
                               " --prompts " + (data / "prompts").string() + " --fixtures " +
                               (data / "fixtures").string();

    // simulate: raw CSV + sidecar + config snapshot, identical for equal seeds
    const fs::path sig_a = work / "a.csv";
    const fs::path sig_b = work / "b.csv";
    const fs::path sig_c = work / "c.csv";
    check(run(common + " simulate --liquid honey --fill two-thirds --seed 42 --out " +
              sig_a.string()) == 0,
          "simulate exits 0");
    check(fs::exists(sig_a), "simulate writes the CSV");
    check(fs::exists(work / "a.meta.json"), "simulate writes the sidecar");
    check(fs::exists(work / "resolved_config.toml"), "simulate writes a config snapshot");
    check(file_text(work / "a.meta.json").find("\"stage\": \"raw\"") != std::string::npos,
          "sidecar stage is raw");

    run(common + " simulate --liquid honey --fill two-thirds --seed 42 --out " +
        sig_b.string());
    run(common + " simulate --liquid honey --fill two-thirds --seed 43 --out " +
        sig_c.string());
    check(file_text(sig_a) == file_text(sig_b), "equal seeds give identical artifacts");
    check(file_text(sig_a) != file_text(sig_c), "different seeds give different artifacts");

    // simulate by id resolves the registry
    check(run(common + " simulate --liquid 1 --seed 1 --out " + (work / "water.csv").string()) ==
              0,
          "simulate accepts a liquid id");

    // process: raw -> standardized; re-processing standardized input fails with 1
    const fs::path processed = work / "a_processed.csv";
    check(run(common + " process --in " + sig_a.string() + " --out " + processed.string()) ==
              0,
          "process exits 0");
    check(file_text(work / "a_processed.meta.json").find("\"stage\": \"standardized\"") !=
              std::string::npos,
          "processed sidecar stage is standardized");
    check(run(common + " process --in " + processed.string() + " --out " +
              (work / "again.csv").string()) == 1,
          "process rejects non-raw input with exit 1");

    // plot: single and concatenated
    const fs::path water_proc = work / "water_processed.csv";
    run(common + " process --in " + (work / "water.csv").string() + " --out " +
        water_proc.string());
    check(run(common + " plot --in " + processed.string() + " --out " +
              (work / "single.svg").string()) == 0,
          "plot exits 0");
    const std::string single_svg = file_text(work / "single.svg");
    check(single_svg.find("<svg") != std::string::npos, "plot writes SVG");
    check(run(common + " plot --in " + processed.string() + " --in2 " + water_proc.string() +
              " --out " + (work / "pair.svg").string()) == 0,
          "two-signal plot exits 0");
    check(file_text(work / "pair.svg").find("width=\"800\"") != std::string::npos,
          "concatenated plot doubles the width");
    check(run(common + " plot --in " + sig_a.string() + " --out " +
              (work / "nope.svg").string()) == 1,
          "plot rejects raw input with exit 1");

    // pairwise: small heuristic run + report
    const fs::path pw_dir = work / "pairwise";
    check(run(common + " --out-dir " + pw_dir.string() +
              " pairwise --backend heuristic --prompt knowledge --fills one-third --trials 1" +
              " --workers 2 --seed 5 --report " + (pw_dir / "report.md").string()) == 0,
          "pairwise exits 0");
    check(fs::exists(pw_dir / "pairwise_results_knowledge.csv"), "pairwise writes results CSV");
    const std::string pw_report = file_text(pw_dir / "report.md");
    check(pw_report.find("| Fill level | Plain | Knowledge-Enhanced |") != std::string::npos,
          "pairwise report has the accuracy table");
    check(pw_report.find("77.1") != std::string::npos,
          "pairwise report carries reference values");

    // report: regenerates byte-identical markdown from the CSV
    const fs::path regen_dir = work / "regen";
    check(run(common + " --out-dir " + regen_dir.string() + " report --pairwise " +
              (pw_dir / "pairwise_results_knowledge.csv").string()) == 0,
          "report exits 0");
    check(file_text(regen_dir / "pairwise_report.md") == pw_report,
          "regenerated pairwise report is byte-identical");

    // recognize: rule-based descriptor run
    const fs::path rec_dir = work / "recognize";
    check(run(common + " --out-dir " + rec_dir.string() +
              " recognize --backend rule --setting nolabels --actions scene --trials 1" +
              " --seed 3 --report " + (rec_dir / "report.md").string()) == 0,
          "recognize exits 0");
    check(fs::exists(rec_dir / "recognition_results.csv"), "recognize writes results CSV");
    check(fs::exists(rec_dir / "confusion_without_labels_scene.csv"),
          "recognize writes the confusion grid");
    check(fs::exists(rec_dir / "confusion_without_labels_scene.svg"),
          "recognize writes the confusion heatmap");
    const std::string rec_report = file_text(rec_dir / "report.md");
    check(rec_report.find("| Look[Scn.]+Look[Cnt.]+Shake[Cnt.] |") != std::string::npos,
          "recognition report lists every method row");
    check(rec_report.find("86.0") != std::string::npos,
          "recognition report carries reference values");

    // validation failures exit 1
    check(run(cli + std::string(" --registry /nonexistent.json --prompts ") +
              (data / "prompts").string() + " simulate --liquid honey --out " +
              (work / "x.csv").string()) == 1,
          "missing registry exits 1");
    check(run(common + " simulate --liquid unobtainium --out " + (work / "y.csv").string()) ==
              1,
          "unknown liquid exits 1");

    // backend failures exit 2: a one-line replay script exhausts immediately
    const fs::path script = work / "tiny_script.json";
    std::ofstream(script) << R"(["The left one is more viscous."])";
    const fs::path cfg = work / "replay.toml";
    std::ofstream(cfg) << "[backend]\nkind = \"replay\"\nreplay_script = \"" +
                              script.string() + "\"\n";
    check(run(common + " --config " + cfg.string() + " --out-dir " +
              (work / "replay_out").string() +
              " pairwise --prompt knowledge --fills one-third --trials 1 --workers 1") == 2,
          "exhausted replay backend exits 2");
    check(fs::exists(work / "replay_out" / "pairwise_results_knowledge_partial.csv"),
          "aborted pairwise run flushes partial results");

    std::printf("cli smoke: %s\n", g_failures == 0 ? "all checks passed" : "FAILURES");
    return g_failures == 0 ? 0 : 1;
}
