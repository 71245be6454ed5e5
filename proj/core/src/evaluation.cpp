#include "hid/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "hid/errors.hpp"

namespace hid {

namespace {

using json = nlohmann::json;

// Share of region pixels that must sit near a hair colour for hair to count as present.
constexpr double kPresenceFraction = 0.25;
constexpr double kHairColorRadius = 0.15;

double rgb_distance(const Rgb& a, const Rgb& b) {
    const double dr = a[0] - b[0];
    const double dg = a[1] - b[1];
    const double db = a[2] - b[2];
    return std::sqrt(dr * dr + dg * dg + db * db);
}

Rgb pixel(const PixelGrid& img, int r, int c) {
    return {img.at(r, c, 0), img.at(r, c, 1), img.at(r, c, 2)};
}

template <typename Pred>
Rgb region_mean(const PixelGrid& img, Pred in_region) {
    Rgb sum{0.0, 0.0, 0.0};
    int n = 0;
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            if (!in_region(r, c)) continue;
            const Rgb p = pixel(img, r, c);
            for (int k = 0; k < 3; ++k) sum[k] += p[k];
            ++n;
        }
    }
    if (n > 0) {
        for (double& v : sum) v /= n;
    }
    return sum;
}

template <typename Pred>
double hair_presence(const PixelGrid& img, Pred in_region) {
    int near = 0;
    int n = 0;
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            if (!in_region(r, c)) continue;
            ++n;
            const Rgb p = pixel(img, r, c);
            for (const Rgb& h : Palette::hair) {
                if (rgb_distance(p, h) <= kHairColorRadius) {
                    ++near;
                    break;
                }
            }
        }
    }
    return n == 0 ? 0.0 : static_cast<double>(near) / n;
}

// Nearest colour among every palette entry of the renderer.
const Rgb* nearest_palette_entry(const Rgb& color) {
    const Rgb* best = &Palette::background;
    double best_d = rgb_distance(color, *best);
    const auto consider = [&](const Rgb& c) {
        const double d = rgb_distance(color, c);
        if (d < best_d) {
            best_d = d;
            best = &c;
        }
    };
    for (const Rgb& c : Palette::skin) consider(c);
    for (const Rgb& c : Palette::hair) consider(c);
    for (const Rgb& c : Palette::clothing) consider(c);
    return best;
}

void require_same_dims(int h1, int w1, int h2, int w2, const char* what) {
    if (h1 != h2 || w1 != w2) throw ShapeMismatchError(std::string(what) + ": dimension mismatch");
}

}  // namespace

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a.height(), a.width(), b.height(), b.width(), "mask_iou");
    const std::size_t inter = (a & b).count();
    const std::size_t uni = (a | b).count();
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double region_mse(const PixelGrid& x, const PixelGrid& y, const BinaryMask& region) {
    if (!x.same_shape(y)) throw ShapeMismatchError("region_mse: image shapes differ");
    require_same_dims(x.height(), x.width(), region.height(), region.width(), "region_mse");
    double acc = 0.0;
    std::size_t n = 0;
    for (int r = 0; r < x.height(); ++r) {
        for (int c = 0; c < x.width(); ++c) {
            if (!region.at(r, c)) continue;
            for (int ch = 0; ch < x.channels(); ++ch) {
                const double d = x.at(r, c, ch) - y.at(r, c, ch);
                acc += d * d;
                ++n;
            }
        }
    }
    return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

ProbeScore attribute_probe(const PixelGrid& image, const AttributeSpec& body,
                           const AttributeSpec& head) {
    using G = AvatarGeometry;
    const AvatarRender oracle = oracle_swap(body, head);
    const int tilt = body.head_tilt;
    ProbeScore score;

    const Rgb skin_mean = region_mean(image, [&](int r, int c) { return oracle.head_mask.at(r, c); });
    if (nearest_palette_entry(skin_mean) == &Palette::skin[head.skin_tone]) ++score.matched;

    if (head.hair_style == HairStyle::Bald) {
        const double cap = hair_presence(image, [&](int r, int c) { return G::in_cap(r, c, tilt); });
        if (cap < kPresenceFraction) ++score.matched;
    } else {
        // Colour is read on the scalp part only; long side strands decide the style.
        const Rgb hair_mean = region_mean(
            image, [&](int r, int c) { return oracle.hair_mask.at(r, c) && G::in_cap(r, c, tilt); });
        if (nearest_palette_entry(hair_mean) == &Palette::hair[head.hair_color]) ++score.matched;
    }

    const double below = hair_presence(image, [&](int r, int c) {
        return r > G::disc_bottom_row() && G::in_long_sides(r, c, tilt);
    });
    const double cap = hair_presence(image, [&](int r, int c) { return G::in_cap(r, c, tilt); });
    HairStyle style = HairStyle::Bald;
    if (below >= kPresenceFraction) {
        style = HairStyle::Long;
    } else if (cap >= kPresenceFraction) {
        style = HairStyle::Short;
    }
    if (style == head.hair_style) ++score.matched;
    return score;
}

std::string to_json_line(const PairRecord& rec) {
    json j = {
        {"pair_id", rec.pair_id},
        {"body_attrs", rec.body_attrs.to_tuple()},
        {"head_attrs", rec.head_attrs.to_tuple()},
        {"variant", to_string(rec.variant)},
        {"iou", rec.iou},
        {"mse_head", rec.mse_head},
        {"mse_outside", rec.mse_outside},
        {"attr_probe", {{"matched", rec.attr_probe.matched}, {"total", rec.attr_probe.total}}},
        {"runtime_ms", rec.runtime_ms},
    };
    return j.dump();
}

PairRecord parse_json_line(const std::string& line) {
    static const std::vector<std::string> kFields = {
        "attr_probe", "body_attrs", "head_attrs", "iou",     "mse_head",
        "mse_outside", "pair_id",   "runtime_ms", "variant"};
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(std::string("metrics record is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.size() != kFields.size()) {
        throw Error("metrics record has the wrong field set");
    }
    for (const auto& f : kFields) {
        if (!j.contains(f)) throw Error("metrics record lacks field '" + f + "'");
    }
    try {
        PairRecord rec;
        rec.pair_id = j.at("pair_id").get<std::string>();
        rec.body_attrs = AttributeSpec::from_tuple(j.at("body_attrs").get<std::array<int, 5>>());
        rec.head_attrs = AttributeSpec::from_tuple(j.at("head_attrs").get<std::array<int, 5>>());
        const auto variant = parse_variant(j.at("variant").get<std::string>());
        if (!variant) throw Error("metrics record has unknown variant");
        rec.variant = *variant;
        rec.iou = j.at("iou").get<double>();
        rec.mse_head = j.at("mse_head").get<double>();
        rec.mse_outside = j.at("mse_outside").get<double>();
        rec.attr_probe.matched = j.at("attr_probe").at("matched").get<int>();
        rec.attr_probe.total = j.at("attr_probe").at("total").get<int>();
        rec.runtime_ms = j.at("runtime_ms").get<double>();
        return rec;
    } catch (const json::exception& e) {
        throw Error(std::string("metrics record has a malformed field: ") + e.what());
    }
}

void RunConfig::validate() const {
    swap.validate();
    if (pairs < 1) throw InvalidParameterError("pairs must be at least 1");
    if (variants.empty()) throw InvalidParameterError("at least one mask variant is required");
}

Summary summarize(const std::vector<PairRecord>& records) {
    Summary s;
    for (const auto& r : records) {
        VariantSummary& v = s[to_string(r.variant)];
        ++v.count;
        v.mean_iou += r.iou;
        v.mean_mse_head += r.mse_head;
        v.mean_mse_outside += r.mse_outside;
        v.mean_probe += static_cast<double>(r.attr_probe.matched) / r.attr_probe.total;
        v.mean_runtime_ms += r.runtime_ms;
    }
    for (auto& [name, v] : s) {
        const double n = static_cast<double>(v.count);
        v.mean_iou /= n;
        v.mean_mse_head /= n;
        v.mean_mse_outside /= n;
        v.mean_probe /= n;
        v.mean_runtime_ms /= n;
    }
    return s;
}

void print_summary(const Summary& summary, std::ostream& out) {
    char buf[256];
    out << "variant   count  mean_iou  mean_mse_head  mean_mse_outside  mean_probe  mean_ms\n";
    for (const auto& [name, v] : summary) {
        std::snprintf(buf, sizeof buf, "%-8s  %5zu  %8.4f  %13.6f  %16.6f  %10.4f  %7.2f\n",
                      name.c_str(), v.count, v.mean_iou, v.mean_mse_head, v.mean_mse_outside,
                      v.mean_probe, v.mean_runtime_ms);
        out << buf;
    }
}

std::vector<std::pair<AttributeSpec, AttributeSpec>> sample_pairs(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<AttributeSpec, AttributeSpec>> pairs;
    pairs.reserve(static_cast<std::size_t>(std::max(count, 0)));
    while (static_cast<int>(pairs.size()) < count) {
        // Plain modulo keeps the stream identical across standard libraries.
        const auto body = AttributeSpec::from_ordinal(static_cast<int>(rng() % kAttributeCombinations));
        const auto head = AttributeSpec::from_ordinal(static_cast<int>(rng() % kAttributeCombinations));
        if (oracle_swap(body, head).image == render_avatar(body).image) continue;
        pairs.emplace_back(body, head);
    }
    return pairs;
}

PairRecord evaluate_swap(const std::string& pair_id, const AttributeSpec& body,
                         const AttributeSpec& head, const SwapResult& result,
                         MaskVariant variant) {
    const AvatarRender oracle = oracle_swap(body, head);
    const PixelGrid body_image = render_avatar(body).image;
    BinaryMask outside(result.mask.height(), result.mask.width());
    for (int r = 0; r < outside.height(); ++r) {
        for (int c = 0; c < outside.width(); ++c) outside.set(r, c, !result.mask.at(r, c));
    }
    PairRecord rec;
    rec.pair_id = pair_id;
    rec.body_attrs = body;
    rec.head_attrs = head;
    rec.variant = variant;
    rec.iou = mask_iou(result.mask, ground_truth_edit_mask(body, head));
    rec.mse_head = region_mse(result.output, oracle.image, oracle.head_mask | oracle.hair_mask);
    rec.mse_outside = region_mse(result.output, body_image, outside);
    rec.attr_probe = attribute_probe(result.output, body, head);
    return rec;
}

namespace {

std::string pair_id_for(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%03d", index);
    return buf;
}

std::vector<PairRecord> run_pair(int index, const AttributeSpec& body, const AttributeSpec& head,
                                 const RunConfig& cfg, const NoiseSchedule& sched,
                                 const NoisePredictor& pred) {
    const std::string id = pair_id_for(index);
    const std::filesystem::path dir = cfg.out_dir / "pairs";
    if (cfg.write_images) {
        write_image(render_avatar(body).image, dir / (id + "_body.ppm"));
        write_image(render_avatar(head).image, dir / (id + "_head.ppm"));
        write_image(oracle_swap(body, head).image, dir / (id + "_oracle.ppm"));
    }
    std::vector<PairRecord> out;
    for (MaskVariant variant : cfg.variants) {
        SwapConfig sc = cfg.swap;
        sc.mask_cfg.variant = variant;
        const auto start = std::chrono::steady_clock::now();
        const SwapResult res = run_headswap(body, head, sc, sched, pred);
        const auto stop = std::chrono::steady_clock::now();
        PairRecord rec = evaluate_swap(id, body, head, res, variant);
        if (cfg.record_timing) {
            rec.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        }
        if (cfg.write_images) {
            const std::string stem = id + "_" + to_string(variant);
            write_image(res.output, dir / (stem + "_output.ppm"));
            write_mask(res.mask, dir / (stem + "_mask.pgm"));
            write_image(overlay_heatmap(render_avatar(body).image, minmax_normalize(res.io_map)),
                        dir / (stem + "_heatmap.ppm"));
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg, const NoisePredictor& pred) {
    cfg.validate();
    const NoiseSchedule sched = make_schedule(cfg.swap.T);
    const auto pairs = sample_pairs(cfg.seed, cfg.pairs);

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir / "pairs", ec);
    if (ec) throw IoError("cannot create output directory: " + (cfg.out_dir / "pairs").string());

    unsigned threads = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
    threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(pairs.size()));

    std::vector<std::vector<PairRecord>> per_pair(pairs.size());
    std::vector<std::future<void>> workers;
    for (unsigned k = 0; k < threads; ++k) {
        workers.push_back(std::async(std::launch::async, [&, k] {
            for (std::size_t i = k; i < pairs.size(); i += threads) {
                per_pair[i] = run_pair(static_cast<int>(i), pairs[i].first, pairs[i].second, cfg,
                                       sched, pred);
            }
        }));
    }
    for (auto& f : workers) f.wait();
    for (auto& f : workers) f.get();  // rethrows the first worker failure

    ExperimentResult result;
    const std::filesystem::path metrics = cfg.out_dir / "metrics.jsonl";
    std::ofstream out(metrics, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + metrics.string());
    for (auto& recs : per_pair) {
        for (auto& r : recs) {
            out << to_json_line(r) << '\n';
            result.records.push_back(std::move(r));
        }
    }
    if (!out) throw IoError("write failed: " + metrics.string());
    result.summary = summarize(result.records);
    return result;
}

std::vector<PairRecord> read_metrics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::vector<PairRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records.push_back(parse_json_line(line));
        } catch (const Error& e) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

}  // namespace hid
