#include "uscnn/cli.hpp"

#include "uscnn/clustering.hpp"
#include "uscnn/image_io.hpp"
#include "uscnn/metrics.hpp"
#include "uscnn/operators.hpp"
#include "uscnn/report.hpp"
#include "uscnn/training.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <unistd.h>

namespace uscnn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Usage-level failure: reported with exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool verbose_from_env() {
    const char* v = std::getenv("USCNN_VERBOSE");
    return v && *v && std::string(v) != "0";
}

/// Collects outputs under temporary names and renames them into place only
/// when every write succeeded. Uncommitted temporaries are removed.
class OutputTransaction {
public:
    OutputTransaction() = default;
    OutputTransaction(const OutputTransaction&) = delete;
    OutputTransaction& operator=(const OutputTransaction&) = delete;
    ~OutputTransaction() {
        std::error_code ec;
        for (const auto& [tmp, final_path] : staged_) fs::remove(tmp, ec);
    }

    fs::path stage(const fs::path& final_path) {
        fs::path tmp = final_path;
        tmp += ".tmp" + std::to_string(::getpid()) + "-" + std::to_string(staged_.size());
        staged_.emplace_back(tmp, final_path);
        return tmp;
    }

    void write_text(const fs::path& final_path, const std::string& text) {
        const fs::path tmp = stage(final_path);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw WriteError("cannot open for writing: " + final_path.string());
        out << text;
        out.flush();
        if (!out) throw WriteError("write failed: " + final_path.string());
    }

    void commit() {
        for (const auto& [tmp, final_path] : staged_) {
            std::error_code ec;
            fs::rename(tmp, final_path, ec);
            if (ec) throw WriteError("cannot move output into place: " + final_path.string() + ": " + ec.message());
        }
        staged_.clear();
    }

private:
    std::vector<std::pair<fs::path, fs::path>> staged_;
};

std::pair<Image, Image> load_pair(const std::string& t1, const std::string& t2, std::ostream& err) {
    std::vector<std::string> warnings;
    Image a = load_gray(t1, &warnings);
    Image b = load_gray(t2, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    if (!same_shape(a, b))
        throw UsageError("input images differ in size: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    return {std::move(a), std::move(b)};
}

ChangeMap load_truth_matching(const std::string& path, Eigen::Index rows, Eigen::Index cols, std::ostream& err) {
    std::vector<std::string> warnings;
    ChangeMap truth = load_truth(path, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    if (truth.rows() != rows || truth.cols() != cols)
        throw UsageError("ground truth size " + std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()) +
                         " does not match inputs " + std::to_string(rows) + "x" + std::to_string(cols));
    return truth;
}

json metrics_json(const Metrics& m) { return json(m); }

struct TrainFlags {
    TrainConfig config;

    void add_to(CLI::App& app, bool with_k = true) {
        if (with_k) app.add_option("--k", config.k, "Weight of the fused-output term (k > 0)")->capture_default_str();
        app.add_option("--epochs", config.epochs, "Full-image RMSprop steps")->capture_default_str();
        app.add_option("--lr", config.learning_rate, "RMSprop learning rate")->capture_default_str();
        app.add_option("--kernels", config.n_kernels, "Kernels per branch (N)")->capture_default_str();
        app.add_option("--seed", config.seed, "Initialization seed")->capture_default_str();
    }
};

struct DetectResult {
    TrainResult training;
    ChangeMap change;
};

DetectResult run_detection(const Image& t1, const Image& t2, const TrainConfig& config, bool verbose,
                           std::ostream& err) {
    EpochCallback progress;
    if (verbose)
        progress = [&err](int epoch, const LossReport& r) {
            err << "epoch " << epoch << " f1=" << r.f1 << " f2=" << r.f2 << " f3=" << r.f3 << " L=" << r.total << '\n';
        };
    DetectResult result{train(t1, t2, config, progress), {}};
    result.change = kmeans_binarize(result.training.difference);
    return result;
}

// ---- detect -----------------------------------------------------------------

struct DetectArgs {
    std::string t1, t2, out;
    std::optional<std::string> truth, report, diff_map;
    bool timing = false;
    TrainFlags flags;
};

int cmd_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
    const bool verbose = verbose_from_env();
    a.flags.config.validate();
    const ImageFormat map_format = format_from_extension(a.out);
    const ImageFormat diff_format = a.diff_map ? format_from_extension(*a.diff_map) : map_format;

    const auto start = std::chrono::steady_clock::now();
    const auto [t1, t2] = load_pair(a.t1, a.t2, err);
    std::optional<ChangeMap> truth;
    if (a.truth) truth = load_truth_matching(*a.truth, t1.rows(), t1.cols(), err);

    const DetectResult det = run_detection(t1, t2, a.flags.config, verbose, err);

    RunReport report;
    report.command = "detect";
    report.config = a.flags.config;
    report.loss_history = det.training.history;
    report.change_map_path = a.out;
    report.difference_map_path = a.diff_map;
    if (truth) report.metrics = evaluate(det.change, *truth);
    if (a.timing)
        report.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    OutputTransaction tx;
    save_map(det.change, tx.stage(a.out), map_format);
    if (a.diff_map) save_map(det.training.difference, tx.stage(*a.diff_map), diff_format);
    if (a.report) tx.write_text(*a.report, json(report).dump(2) + "\n");
    tx.commit();

    if (report.metrics) out << metrics_json(*report.metrics).dump(2) << '\n';
    if (verbose) err << "wrote " << a.out << '\n';
    return kExitOk;
}

// ---- lmr --------------------------------------------------------------------

struct LmrArgs {
    std::string t1, t2, out;
    int window = 3;
    std::optional<std::string> truth, diff_map;
};

int cmd_lmr(const LmrArgs& a, std::ostream& out, std::ostream& err) {
    if (a.window <= 0 || a.window % 2 == 0)
        throw UsageError("--window must be an odd positive integer, got " + std::to_string(a.window));
    const ImageFormat map_format = format_from_extension(a.out);
    const ImageFormat diff_format = a.diff_map ? format_from_extension(*a.diff_map) : map_format;

    const auto [t1, t2] = load_pair(a.t1, a.t2, err);
    if (a.window > std::min(t1.rows(), t1.cols()))
        throw UsageError("--window " + std::to_string(a.window) + " exceeds the image size");
    std::optional<ChangeMap> truth;
    if (a.truth) truth = load_truth_matching(*a.truth, t1.rows(), t1.cols(), err);

    const DifferenceMap di = lmr(t1, t2, a.window);
    const ChangeMap change = kmeans_binarize(di);

    OutputTransaction tx;
    save_map(change, tx.stage(a.out), map_format);
    if (a.diff_map) save_map(di, tx.stage(*a.diff_map), diff_format);
    tx.commit();

    if (truth) out << metrics_json(evaluate(change, *truth)).dump(2) << '\n';
    return kExitOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
    std::string pred, truth;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<std::string> warnings;
    const ChangeMap pred = load_truth(a.pred, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    const ChangeMap truth = load_truth_matching(a.truth, pred.rows(), pred.cols(), err);
    out << metrics_json(evaluate(pred, truth)).dump(2) << '\n';
    return kExitOk;
}

// ---- sweep-k ----------------------------------------------------------------

struct SweepArgs {
    std::string t1, t2, truth;
    std::vector<double> ks;
    std::optional<std::string> csv;
    TrainFlags flags;
};

std::vector<double> default_k_list() {
    std::vector<double> ks;
    for (int k = 2; k <= 40; k += 2) ks.push_back(k);
    return ks;
}

std::string format_k(double k) {
    std::ostringstream s;
    s << std::setprecision(17) << k;
    return s.str();
}

int cmd_sweep_k(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    const bool verbose = verbose_from_env();
    if (a.ks.empty()) throw UsageError("--ks must list at least one value");
    for (double k : a.ks) {
        TrainConfig c = a.flags.config;
        c.k = k;
        c.validate();
    }
    const auto [t1, t2] = load_pair(a.t1, a.t2, err);
    const ChangeMap truth = load_truth_matching(a.truth, t1.rows(), t1.cols(), err);

    std::ostringstream csv;
    csv << std::setprecision(17) << "k,pcc,kappa,oe\n";
    for (double k : a.ks) {
        TrainConfig c = a.flags.config;
        c.k = k;
        const DetectResult det = run_detection(t1, t2, c, false, err);
        const Metrics m = evaluate(det.change, truth);
        csv << format_k(k) << ',' << m.pcc << ',' << m.kappa << ',' << m.oe << '\n';
        if (verbose) err << "k=" << k << " pcc=" << m.pcc << " kappa=" << m.kappa << " oe=" << m.oe << '\n';
    }

    if (a.csv) {
        OutputTransaction tx;
        tx.write_text(*a.csv, csv.str());
        tx.commit();
    } else {
        out << csv.str();
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Unsupervised change detection for co-registered bi-temporal images", "uscnn"};
    app.require_subcommand(1);

    DetectArgs detect;
    auto* sc_detect = app.add_subcommand("detect", "Train the two-branch network on the pair and write a binary change map");
    sc_detect->add_option("t1", detect.t1, "First-date image (PGM/PNG)")->required();
    sc_detect->add_option("t2", detect.t2, "Second-date image (PGM/PNG)")->required();
    sc_detect->add_option("out", detect.out, "Output change map (.pgm/.png)")->required();
    sc_detect->add_option("--truth", detect.truth, "Ground-truth map; adds metrics to stdout and the report");
    sc_detect->add_option("--report", detect.report, "Write a JSON run report");
    sc_detect->add_option("--diff-map", detect.diff_map, "Also write the scaled difference map |M|");
    sc_detect->add_flag("--timing", detect.timing, "Record wall-clock seconds in the report");
    detect.flags.add_to(*sc_detect);

    LmrArgs lmr_args;
    auto* sc_lmr = app.add_subcommand("lmr", "Log-mean-ratio baseline with k-means binarization");
    sc_lmr->add_option("t1", lmr_args.t1, "First-date image")->required();
    sc_lmr->add_option("t2", lmr_args.t2, "Second-date image")->required();
    sc_lmr->add_option("out", lmr_args.out, "Output change map (.pgm/.png)")->required();
    sc_lmr->add_option("--window", lmr_args.window, "Odd neighborhood size")->capture_default_str();
    sc_lmr->add_option("--truth", lmr_args.truth, "Ground-truth map; prints metrics");
    sc_lmr->add_option("--diff-map", lmr_args.diff_map, "Also write the scaled difference map");

    EvalArgs eval;
    auto* sc_eval = app.add_subcommand("eval", "Compare a binary change map with ground truth");
    sc_eval->add_option("pred", eval.pred, "Predicted change map")->required();
    sc_eval->add_option("truth", eval.truth, "Ground-truth map")->required();

    SweepArgs sweep;
    sweep.ks = default_k_list();
    auto* sc_sweep = app.add_subcommand("sweep-k", "Run detection for several k values and emit k,pcc,kappa,oe CSV");
    sc_sweep->alias("sweep_k");
    sc_sweep->add_option("t1", sweep.t1, "First-date image")->required();
    sc_sweep->add_option("t2", sweep.t2, "Second-date image")->required();
    sc_sweep->add_option("truth", sweep.truth, "Ground-truth map")->required();
    sc_sweep->add_option("--ks", sweep.ks, "Comma-separated k values")->delimiter(',')->capture_default_str();
    sc_sweep->add_option("--csv", sweep.csv, "Write the CSV here instead of stdout");
    sweep.flags.add_to(*sc_sweep, false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == static_cast<int>(CLI::ExitCodes::Success) ? kExitOk : kExitUsage;
    }

    try {
        if (*sc_detect) return cmd_detect(detect, out, err);
        if (*sc_lmr) return cmd_lmr(lmr_args, out, err);
        if (*sc_eval) return cmd_eval(eval, out, err);
        return cmd_sweep_k(sweep, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UnsupportedFormatError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace uscnn::cli
