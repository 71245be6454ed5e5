#include "hid/cli.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hid/evaluation.hpp"

namespace hid {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
std::optional<T> parse_number(const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return value;
}

MaskVariant require_variant(const std::string& name, const std::string& where) {
    const auto v = parse_variant(name);
    if (!v) {
        throw UsageError(where + ": unknown variant '" + name + "' (expected naive, no_orth, full)");
    }
    return *v;
}

/// Options shared by swap, mask and ablate. Unset flags leave file/default values.
struct Overrides {
    std::optional<std::string> config;
    std::optional<int> T;
    std::optional<double> w;
    std::optional<double> tau;
    std::optional<double> sigma;
    std::optional<double> edit_fraction;
    std::optional<std::string> variant;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App& app) {
        app.add_option("--config", config, "Config file of `key = value` lines");
        app.add_option("--T", T, "Number of diffusion steps");
        app.add_option("--w", w, "Guidance scale of head-conditioned denoising");
        app.add_option("--tau", tau, "IOMask threshold in [0, 1]");
        app.add_option("--sigma", sigma, "Gaussian filter width in pixels");
        app.add_option("--edit-fraction", edit_fraction, "Fraction of the schedule to edit");
        app.add_option("--variant", variant, "IO map variant: naive, no_orth, full");
        app.add_option("--seed", seed, "Seed for pair sampling");
    }

    CliSettings resolve() const {
        CliSettings s;
        if (config) s = apply_config_file(*config, s);
        if (T) s.swap.T = *T;
        if (w) {
            s.swap.w = *w;
            s.swap.mask_cfg.w = *w;
        }
        if (tau) s.swap.mask_cfg.tau = *tau;
        if (sigma) s.swap.mask_cfg.sigma = *sigma;
        if (edit_fraction) s.swap.edit_fraction = *edit_fraction;
        if (variant) s.swap.mask_cfg.variant = require_variant(*variant, "--variant");
        if (seed) s.seed = *seed;
        try {
            s.swap.validate();
        } catch (const InvalidParameterError& e) {
            throw UsageError(std::string("invalid configuration: ") + e.what());
        }
        return s;
    }
};

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir.string());
}

NoisePredictor dataset_predictor() { return NoisePredictor::from_renders(enumerate_dataset()); }

void write_summary_json(const Summary& summary, const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, v] : summary) {
        j[name] = {{"count", v.count},
                   {"mean_iou", v.mean_iou},
                   {"mean_mse_head", v.mean_mse_head},
                   {"mean_mse_outside", v.mean_mse_outside},
                   {"mean_probe", v.mean_probe},
                   {"mean_runtime_ms", v.mean_runtime_ms}};
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

int run_gen(const std::filesystem::path& out_dir, std::ostream& out) {
    ensure_dir(out_dir);
    const auto renders = enumerate_dataset();
    const auto index_path = out_dir / "dataset.tsv";
    std::ofstream index(index_path, std::ios::trunc);
    if (!index) throw IoError("cannot open for writing: " + index_path.string());
    for (std::size_t i = 0; i < renders.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "avatar_%03zu.ppm", i);
        write_image(renders[i].image, out_dir / name);
        index << name;
        for (int v : renders[i].attrs.to_tuple()) index << '\t' << v;
        index << '\n';
    }
    if (!index) throw IoError("write failed: " + index_path.string());
    out << "wrote " << renders.size() << " avatars to " << out_dir.string() << '\n';
    return kExitOk;
}

int run_swap(const AttributeSpec& body, const AttributeSpec& head, const CliSettings& s,
             const std::filesystem::path& out_dir, std::ostream& out) {
    ensure_dir(out_dir);
    const NoisePredictor pred = dataset_predictor();
    const NoiseSchedule sched = make_schedule(s.swap.T);
    const SwapResult res = run_headswap(body, head, s.swap, sched, pred);
    const PixelGrid body_image = render_avatar(body).image;

    write_image(body_image, out_dir / "body.ppm");
    write_image(render_avatar(head).image, out_dir / "head.ppm");
    write_image(oracle_swap(body, head).image, out_dir / "oracle.ppm");
    write_image(res.output, out_dir / "output.ppm");
    write_mask(res.mask, out_dir / "mask.pgm");
    const ScalarField normalized = minmax_normalize(res.io_map);
    write_field(normalized, out_dir / "iomap.pgm");
    write_image(overlay_heatmap(body_image, normalized), out_dir / "heatmap.ppm");

    const PairRecord rec = evaluate_swap("swap", body, head, res, s.swap.mask_cfg.variant);
    const auto metrics = out_dir / "metrics.jsonl";
    std::ofstream m(metrics, std::ios::trunc);
    if (!m) throw IoError("cannot open for writing: " + metrics.string());
    m << to_json_line(rec) << '\n';

    out << "iou=" << rec.iou << " mse_head=" << rec.mse_head
        << " mse_outside=" << rec.mse_outside << " probe=" << rec.attr_probe.matched << '/'
        << rec.attr_probe.total << " mask_pixels=" << res.mask.count()
        << (res.degenerate_mask ? " (degenerate mask)" : "") << '\n';
    return kExitOk;
}

int run_mask(const AttributeSpec& body, const AttributeSpec& head, const CliSettings& s,
             const std::filesystem::path& out_dir, std::ostream& out) {
    ensure_dir(out_dir);
    const NoisePredictor pred = dataset_predictor();
    const NoiseSchedule sched = make_schedule(s.swap.T);
    const PixelGrid body_image = render_avatar(body).image;
    const Condition c_body = body_condition(body);
    const InversionTrajectory traj = invert_trajectory(body_image, c_body, sched, pred);
    const ScalarField map = io_map(traj, s.swap.edit_step(), edit_condition(head, body),
                                   c_body, s.swap.mask_cfg, sched, pred);
    const BinaryMask mask = build_iomask(map, s.swap.mask_cfg);
    const ScalarField normalized = minmax_normalize(map);
    write_field(normalized, out_dir / "iomap.pgm");
    write_mask(mask, out_dir / "mask.pgm");
    write_image(overlay_heatmap(body_image, normalized), out_dir / "overlay.ppm");
    out << "mask_pixels=" << mask.count()
        << " iou=" << mask_iou(mask, ground_truth_edit_mask(body, head)) << '\n';
    return kExitOk;
}

int run_ablate(int pairs, const CliSettings& s, const std::filesystem::path& out_dir,
               unsigned threads, bool timing, bool images, std::ostream& out) {
    RunConfig rc;
    rc.swap = s.swap;
    rc.seed = s.seed;
    rc.pairs = pairs;
    rc.variants = {MaskVariant::Naive, MaskVariant::NoOrth, MaskVariant::Full};
    rc.out_dir = out_dir;
    rc.threads = threads;
    rc.record_timing = timing;
    rc.write_images = images;
    try {
        rc.validate();
    } catch (const InvalidParameterError& e) {
        throw UsageError(e.what());
    }
    const NoisePredictor pred = dataset_predictor();
    const ExperimentResult res = run_experiment(rc, pred);
    write_summary_json(res.summary, out_dir / "summary.json");
    print_summary(res.summary, out);
    return kExitOk;
}

int run_eval(const std::filesystem::path& out_dir, std::ostream& out) {
    const auto records = read_metrics(out_dir / "metrics.jsonl");
    const Summary summary = summarize(records);
    write_summary_json(summary, out_dir / "summary.json");
    print_summary(summary, out);
    return kExitOk;
}

}  // namespace

CliSettings apply_config_file(const std::filesystem::path& path, CliSettings s) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file: " + path.string());
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        std::string line = raw.substr(0, raw.find('#'));
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(where + ": expected `key = value`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto bad = [&]() -> UsageError {
            return UsageError(where + ": bad value '" + value + "' for key '" + key + "'");
        };
        if (key == "T") {
            const auto v = parse_number<int>(value);
            if (!v) throw bad();
            s.swap.T = *v;
        } else if (key == "w") {
            const auto v = parse_number<double>(value);
            if (!v) throw bad();
            s.swap.w = *v;
            s.swap.mask_cfg.w = *v;
        } else if (key == "tau") {
            const auto v = parse_number<double>(value);
            if (!v) throw bad();
            s.swap.mask_cfg.tau = *v;
        } else if (key == "sigma") {
            const auto v = parse_number<double>(value);
            if (!v) throw bad();
            s.swap.mask_cfg.sigma = *v;
        } else if (key == "edit_fraction") {
            const auto v = parse_number<double>(value);
            if (!v) throw bad();
            s.swap.edit_fraction = *v;
        } else if (key == "variant") {
            s.swap.mask_cfg.variant = require_variant(value, where);
        } else if (key == "seed") {
            const auto v = parse_number<std::uint64_t>(value);
            if (!v) throw bad();
            s.seed = *v;
        } else {
            throw UsageError(where + ": unknown key '" + key + "'");
        }
    }
    return s;
}

AttributeSpec parse_attribute_tuple(const std::string& text, const std::string& flag) {
    std::array<int, 5> values{};
    std::stringstream ss(text);
    std::string item;
    std::size_t n = 0;
    while (std::getline(ss, item, ',')) {
        if (n == values.size()) {
            throw UsageError(flag + ": expected 5 comma-separated integers (" +
                             "skin_tone,hair_style,hair_color,clothing_color,head_tilt)");
        }
        const auto v = parse_number<int>(trim(item));
        if (!v) {
            throw UsageError(flag + ": " + kAttributeNames[n] + " is not an integer: '" + item + "'");
        }
        values[n++] = *v;
    }
    if (n != values.size()) {
        throw UsageError(flag + ": expected 5 comma-separated integers, missing " +
                         std::string(kAttributeNames[n]));
    }
    try {
        return AttributeSpec::from_tuple(values);
    } catch (const InvalidParameterError& e) {
        throw UsageError(flag + ": " + e.what());
    }
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Head swapping by diffusion inversion, IOMask extraction and masked blending",
                 "hid"};
    app.require_subcommand(1);

    std::string out_dir;
    std::string body_text;
    std::string head_text;
    int pairs = 0;
    unsigned threads = 0;
    bool timing = false;
    bool no_images = false;

    auto* gen = app.add_subcommand("gen", "Render the avatar dataset and dataset.tsv");
    gen->add_option("--out", out_dir, "Output directory")->required();

    Overrides swap_ov;
    auto* swap = app.add_subcommand("swap", "Run one head swap");
    swap->add_option("--body", body_text, "Body attributes a,b,c,d,e")->required();
    swap->add_option("--head", head_text, "Head attributes a,b,c,d,e")->required();
    swap->add_option("--out", out_dir, "Output directory")->required();
    swap_ov.attach(*swap);

    Overrides mask_ov;
    auto* mask = app.add_subcommand("mask", "Extract the IO map and IOMask only");
    mask->add_option("--body", body_text, "Body attributes a,b,c,d,e")->required();
    mask->add_option("--head", head_text, "Head attributes a,b,c,d,e")->required();
    mask->add_option("--out", out_dir, "Output directory")->required();
    mask_ov.attach(*mask);

    Overrides ablate_ov;
    auto* ablate = app.add_subcommand("ablate", "Run all mask variants over seeded pairs");
    ablate->add_option("--pairs", pairs, "Number of (body, head) pairs")->required();
    ablate->add_option("--out", out_dir, "Output directory")->required();
    ablate->add_option("--threads", threads, "Worker threads (0 = all cores)");
    ablate->add_flag("--timing", timing, "Record wall-clock runtime_ms");
    ablate->add_flag("--no-images", no_images, "Skip per-pair image files");
    ablate_ov.attach(*ablate);

    auto* eval = app.add_subcommand("eval", "Recompute the summary from metrics.jsonl");
    eval->add_option("--out", out_dir, "Directory holding metrics.jsonl")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return run_gen(out_dir, out);
        if (swap->parsed()) {
            const auto body = parse_attribute_tuple(body_text, "--body");
            const auto head = parse_attribute_tuple(head_text, "--head");
            return run_swap(body, head, swap_ov.resolve(), out_dir, out);
        }
        if (mask->parsed()) {
            const auto body = parse_attribute_tuple(body_text, "--body");
            const auto head = parse_attribute_tuple(head_text, "--head");
            return run_mask(body, head, mask_ov.resolve(), out_dir, out);
        }
        if (ablate->parsed()) {
            return run_ablate(pairs, ablate_ov.resolve(), out_dir, threads, timing, !no_images,
                              out);
        }
        if (eval->parsed()) return run_eval(out_dir, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace hid
