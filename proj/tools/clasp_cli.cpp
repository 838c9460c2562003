// Command-line front end. Talks to the engine only through the C interface.

#include "clasp/clasp.h"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Library failure carrying the status and the library's one-line message.
struct Failure {
    clasp_status status;
    std::string message;
};

void check(clasp_status s) {
    if (s != CLASP_OK) {
        throw Failure{s, clasp_last_error()};
    }
}

struct UsageError {
    std::string message;
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Failure{CLASP_ERR_IO, "IoFailure: cannot create directory " + dir.string() + ": " + ec.message()};
    }
}

// Creates the directory that will hold `path`, if any.
void ensure_parent(const fs::path& path) {
    if (!path.parent_path().empty()) {
        ensure_dir(path.parent_path());
    }
}

template <typename T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(ptr); }
    T** out() { return &ptr; }
    T* get() const { return ptr; }
};

using Features = Handle<clasp_features, clasp_features_free>;
using Image = Handle<clasp_image, clasp_image_free>;
using Result = Handle<clasp_result, clasp_result_free>;

// ---------------------------------------------------------------- segment

struct SegmentArgs {
    std::string features;
    std::string image;
    std::string out;
    std::string dump_spectrum;
    std::string dump_search;
    bool no_crf = false;
    int fixed_k = 0;
    int jobs = 1;
    bool quiet = false;
    clasp_segment_options options{};
};

struct Job {
    fs::path features;
    fs::path image;  // empty for the patch variant
    fs::path out;
    fs::path spectrum;
    fs::path search;
};

std::string run_segment_job(const Job& job, const clasp_segment_options& options) {
    Features features;
    check(clasp_features_read(job.features.c_str(), features.out()));
    Image image;
    if (options.use_crf) {
        check(clasp_image_read_png(job.image.c_str(), image.out()));
    }
    Result result;
    check(clasp_segment(features.get(), image.get(), &options, result.out()));
    // Diagnostics first, mask last: a failure never leaves a mask without
    // its sidecar.
    if (!job.spectrum.empty()) {
        check(clasp_result_write_spectrum(result.get(), job.spectrum.c_str()));
    }
    if (!job.search.empty()) {
        check(clasp_result_write_search(result.get(), job.search.c_str()));
    }
    check(clasp_result_write_mask(result.get(), job.out.c_str()));

    clasp_result_info info{};
    check(clasp_result_info_get(result.get(), &info));
    char line[256];
    std::snprintf(line, sizeof line, "%s: k=%d k_opt=%d silhouette=%.6f variant=%s", job.out.filename().c_str(),
                  info.k, info.k_opt, info.silhouette, options.use_crf ? "pixel" : "patch");
    return line;
}

std::vector<Job> plan_segment(const SegmentArgs& a) {
    const bool batch = fs::is_directory(a.features);
    if (!batch) {
        for (const std::string* p : {&a.out, &a.dump_spectrum, &a.dump_search}) {
            if (!p->empty()) {
                ensure_parent(*p);
            }
        }
        return {Job{a.features, a.image, a.out, a.dump_spectrum, a.dump_search}};
    }
    // Batch mode: every *.clspf in the directory; images, masks and dumps are
    // matched by file stem inside the corresponding directories.
    if (!a.image.empty() && !fs::is_directory(a.image)) {
        throw UsageError{"--image must be a directory when --features is a directory"};
    }
    for (const std::string* dir : {&a.out, &a.dump_spectrum, &a.dump_search}) {
        if (!dir->empty()) {
            ensure_dir(*dir);
        }
    }
    std::vector<fs::path> inputs;
    for (const auto& e : fs::directory_iterator(a.features)) {
        if (e.is_regular_file() && e.path().extension() == ".clspf") {
            inputs.push_back(e.path());
        }
    }
    std::sort(inputs.begin(), inputs.end());
    std::vector<Job> jobs;
    for (const auto& in : inputs) {
        const auto stem = in.stem().string();
        Job j;
        j.features = in;
        if (!a.image.empty()) {
            j.image = fs::path(a.image) / (stem + ".png");
        }
        j.out = fs::path(a.out) / (stem + ".png");
        if (!a.dump_spectrum.empty()) {
            j.spectrum = fs::path(a.dump_spectrum) / (stem + ".spectrum.json");
        }
        if (!a.dump_search.empty()) {
            j.search = fs::path(a.dump_search) / (stem + ".search.json");
        }
        jobs.push_back(std::move(j));
    }
    return jobs;
}

int run_segment(SegmentArgs& a) {
    a.options.use_crf = a.no_crf ? 0 : 1;
    a.options.fixed_k = a.fixed_k;
    if (a.options.use_crf && a.image.empty()) {
        throw UsageError{"MissingImageForCrf: the pixel variant needs --image; pass --no-crf for the patch variant"};
    }
    const auto jobs = plan_segment(a);
    std::vector<std::string> lines(jobs.size());
    std::vector<std::optional<Failure>> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                lines[i] = run_segment_job(jobs[i], a.options);
            } catch (const Failure& f) {
                errors[i] = f;
            }
        }
    };
    const int threads = std::max(1, std::min<int>(a.jobs, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    int failed = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (errors[i]) {
            ++failed;
            std::cerr << "clasp: " << jobs[i].features.string() << ": " << errors[i]->message << "\n";
        } else if (!a.quiet) {
            std::cout << lines[i] << "\n";
        }
    }
    return failed ? kExitData : kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string pred;
    std::string gt;
    std::string out;
    int ignore = 255;
    bool many_to_one = false;
    int jobs = 1;
};

int run_eval(const EvalArgs& a) {
    clasp_eval_options opt;
    clasp_eval_options_default(&opt);
    opt.ignore_label = a.ignore;
    opt.many_to_one = a.many_to_one ? 1 : 0;
    opt.jobs = a.jobs;
    ensure_parent(a.out);
    clasp_eval_summary summary{};
    check(clasp_evaluate_dirs(a.pred.c_str(), a.gt.c_str(), &opt, a.out.c_str(), &summary));
    std::printf("images=%d miou=%.6f pixel_acc=%.6f\n", summary.n_images, summary.miou, summary.pixel_acc);
    return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string out;
    std::string labels;
    std::string layout = "vertical-bands";
    double min_angle_deg = 60.0;
    clasp_synth_params params{};
};

int run_synth(SynthArgs& a) {
    a.params.layout = a.layout == "grid-blocks" ? CLASP_LAYOUT_GRID_BLOCKS : CLASP_LAYOUT_VERTICAL_BANDS;
    a.params.min_center_angle = a.min_angle_deg * 3.14159265358979323846 / 180.0;
    ensure_parent(a.out);
    if (!a.labels.empty()) {
        ensure_parent(a.labels);
    }
    check(clasp_synth_write(&a.params, a.out.c_str(), a.labels.empty() ? nullptr : a.labels.c_str()));
    return kExitOk;
}

// ---------------------------------------------------------------- inspect

int run_inspect(const std::string& path) {
    clasp_features_info info{};
    check(clasp_features_read_info(path.c_str(), &info));
    // Validate the payload too, so inspect doubles as a file checker.
    Features features;
    check(clasp_features_read(path.c_str(), features.out()));
    const auto& g = info.geometry;
    std::printf("format: CLSPF v%u\n", info.version);
    std::printf("original: %d x %d\n", g.orig_h, g.orig_w);
    std::printf("resized: %d x %d\n", g.resized_h, g.resized_w);
    std::printf("patch grid: %d x %d (%llu patches)\n", g.rows, g.cols,
                static_cast<unsigned long long>(info.patch_count));
    std::printf("dim: %d\n", info.dim);
    std::printf("payload bytes: %llu\n", static_cast<unsigned long long>(info.patch_count) * info.dim * 4ull);
    return kExitOk;
}

// Accepts values strictly between 0 and 1.
const CLI::Validator kOpenUnit(
    [](std::string& s) -> std::string {
        double v = 0;
        try {
            v = std::stod(s);
        } catch (...) {
            return "not a number: " + s;
        }
        return (v > 0.0 && v < 1.0) ? std::string() : "must lie strictly between 0 and 1";
    },
    "(0,1)");

const CLI::Validator kPositive(
    [](std::string& s) -> std::string {
        double v = 0;
        try {
            v = std::stod(s);
        } catch (...) {
            return "not a number: " + s;
        }
        return v > 0.0 ? std::string() : "must be positive";
    },
    "POSITIVE");

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "clasp: training-free image segmentation from patch features.\n"
        "\n"
        "Variants:\n"
        "  pixel  (default) spectral clustering of patch features, then dense CRF\n"
        "         refinement against the source image at pixel level; needs --image.\n"
        "  patch  (--no-crf) the patch clustering replicated to pixels, no CRF.\n",
        "clasp"};
    app.set_version_flag("--version", std::string(clasp_version()));
    app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
    app.require_subcommand(1);
    app.footer(
        "Exit status: 0 success, 1 usage error, 2 data error.\n"
        "Config files use one [section] per subcommand, e.g.\n"
        "  [segment]\n  beta = 0.5\n  crf-iterations = 20");

    // segment
    SegmentArgs seg;
    clasp_segment_options_default(&seg.options);
    auto* s = app.add_subcommand("segment", "Segment one image (or a directory of feature files)");
    s->add_option("--features", seg.features, "CLSPF feature file, or a directory of *.clspf files")
        ->required()
        ->check(CLI::ExistingPath);
    s->add_option("--image", seg.image, "Source image (PNG) for the pixel variant; a directory in batch mode");
    s->add_option("--out", seg.out, "Output mask PNG (palettized, value = label) plus a .json sidecar; "
                                    "a directory in batch mode")
        ->required();
    s->add_option("--beta", seg.options.beta, "Bandwidth around the eigengap estimate")
        ->default_val(seg.options.beta)
        ->check(kOpenUnit);
    s->add_option("--seed", seg.options.seed, "Clustering seed")->default_val(seg.options.seed);
    s->add_flag("--no-crf", seg.no_crf, "Patch variant: skip CRF refinement (no image needed)");
    s->add_option("--fixed-k", seg.fixed_k, "Use exactly K clusters instead of the adaptive search")
        ->check(CLI::Range(2, 1 << 20));
    s->add_flag("--normalize-rows", seg.options.normalize_rows, "Row-normalize the spectral embedding");
    s->add_option("--dump-spectrum", seg.dump_spectrum, "Write eigenvalues, gaps and elbow distances as JSON");
    s->add_option("--dump-search", seg.dump_search, "Write the per-k silhouette trace as JSON");
    s->add_option("--jobs", seg.jobs, "Images processed in parallel (batch mode)")
        ->default_val(1)
        ->check(CLI::Range(1, 1024));
    s->add_flag("--quiet", seg.quiet, "Do not print the per-image summary");
    auto& crf = seg.options.crf;
    s->add_option("--crf-iterations", crf.iterations, "Mean-field iterations")
        ->default_val(crf.iterations)
        ->check(CLI::Range(1, 100000))
        ->group("CRF");
    s->add_option("--crf-gt-prob", crf.gt_prob, "Confidence in the clustering labels")
        ->default_val(crf.gt_prob)
        ->check(kOpenUnit)
        ->group("CRF");
    s->add_option("--crf-gauss-sxy", crf.gauss_sxy, "Spatial kernel deviation (pixels)")
        ->default_val(crf.gauss_sxy)
        ->check(kPositive)
        ->group("CRF");
    s->add_option("--crf-gauss-compat", crf.gauss_compat, "Spatial kernel weight")
        ->default_val(crf.gauss_compat)
        ->check(CLI::NonNegativeNumber)
        ->group("CRF");
    s->add_option("--crf-bilat-sxy", crf.bilat_sxy, "Bilateral kernel spatial deviation (pixels)")
        ->default_val(crf.bilat_sxy)
        ->check(kPositive)
        ->group("CRF");
    s->add_option("--crf-bilat-srgb", crf.bilat_srgb, "Bilateral kernel colour deviation (0-255 scale)")
        ->default_val(crf.bilat_srgb)
        ->check(kPositive)
        ->group("CRF");
    s->add_option("--crf-bilat-compat", crf.bilat_compat, "Bilateral kernel weight")
        ->default_val(crf.bilat_compat)
        ->check(CLI::NonNegativeNumber)
        ->group("CRF");
    s->add_option("--crf-max-pixels", crf.max_pixels,
                  "Inference resolution cap; larger images are refined downsampled. Exact inference "
                  "costs O(pixels^2) per iteration")
        ->default_val(crf.max_pixels)
        ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40))
        ->group("CRF");

    // eval
    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Score predicted masks against ground truth (per-image matching)");
    e->add_option("--pred", ev.pred, "Directory of predicted mask PNGs")->required()->check(CLI::ExistingDirectory);
    e->add_option("--gt", ev.gt, "Directory of ground-truth PNGs with the same file names")
        ->required()
        ->check(CLI::ExistingDirectory);
    e->add_option("--ignore", ev.ignore, "Ground-truth label excluded from scoring (-1: none)")->default_val(255);
    e->add_flag("--many-to-one", ev.many_to_one, "Map each cluster to its majority class instead of one-to-one");
    e->add_option("--jobs", ev.jobs, "Images evaluated in parallel")->default_val(1)->check(CLI::Range(1, 1024));
    e->add_option("--out", ev.out, "Output JSON: miou, pixel_acc, n_images, per-image records")->required();

    // synth
    SynthArgs sy;
    clasp_synth_params_default(&sy.params);
    auto* y = app.add_subcommand("synth", "Write a planted-partition feature file for testing");
    y->add_option("--rows", sy.params.rows, "Patch rows")->default_val(sy.params.rows)->check(CLI::Range(1, 4096));
    y->add_option("--cols", sy.params.cols, "Patch columns")->default_val(sy.params.cols)->check(CLI::Range(1, 4096));
    y->add_option("--k", sy.params.k, "Number of planted regions")->default_val(sy.params.k)->check(CLI::Range(1, 4096));
    y->add_option("--sigma", sy.params.sigma, "Per-coordinate Gaussian noise")
        ->default_val(sy.params.sigma)
        ->check(CLI::NonNegativeNumber);
    y->add_option("--seed", sy.params.seed, "Generator seed")->default_val(sy.params.seed);
    y->add_option("--dim", sy.params.dim, "Feature dimension")->default_val(sy.params.dim)->check(CLI::Range(1, 65536));
    y->add_option("--layout", sy.layout, "Region layout")
        ->default_val(sy.layout)
        ->check(CLI::IsMember({"vertical-bands", "grid-blocks"}));
    y->add_option("--min-angle", sy.min_angle_deg, "Minimum angle between region centres (degrees)")
        ->default_val(sy.min_angle_deg)
        ->check(CLI::Range(0.001, 180.0));
    y->add_option("--labels", sy.labels, "Also write the planted labels as a mask PNG at pixel resolution");
    y->add_option("--out", sy.out, "Output CLSPF file")->required();

    // inspect
    std::string inspect_path;
    auto* in = app.add_subcommand("inspect", "Print the header of a feature file and validate its payload");
    in->add_option("--features", inspect_path, "CLSPF feature file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        std::cout << clasp_version() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& err) {
        std::string msg = err.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "clasp: usage: " << msg << " (see --help)\n";
        return kExitUsage;
    }

    try {
        if (*s) {
            return run_segment(seg);
        }
        if (*e) {
            return run_eval(ev);
        }
        if (*y) {
            return run_synth(sy);
        }
        return run_inspect(inspect_path);
    } catch (const UsageError& u) {
        std::cerr << "clasp: usage: " << u.message << "\n";
        return kExitUsage;
    } catch (const Failure& f) {
        std::cerr << "clasp: " << f.message << "\n";
        return kExitData;
    } catch (const std::exception& ex) {
        std::cerr << "clasp: " << ex.what() << "\n";
        return kExitData;
    }
}
