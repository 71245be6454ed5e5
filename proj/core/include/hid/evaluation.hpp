#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hid/headswap.hpp"

namespace hid {

/// |a & b| / |a | b|, 1 when both masks are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// Mean of (x - y)^2 over region pixels and all channels; 0 for an empty region.
double region_mse(const PixelGrid& x, const PixelGrid& y, const BinaryMask& region);

struct ProbeScore {
    int matched = 0;
    int total = 3;

    friend bool operator==(const ProbeScore&, const ProbeScore&) = default;
};

/// Reads skin tone, hair colour and hair style back from an image at the
/// oracle swap's head and hair locations and counts agreements with head.
/// Skin and hair colour are the nearest palette entry to a region mean (hair
/// colour over the scalp part of the hair region). Style is long when at least
/// 25% of the below-disc strand pixels lie within 0.15 of a hair colour, else
/// short when the scalp passes the same test, else bald.
ProbeScore attribute_probe(const PixelGrid& image, const AttributeSpec& body,
                           const AttributeSpec& head);

struct PairRecord {
    std::string pair_id;
    AttributeSpec body_attrs;
    AttributeSpec head_attrs;
    MaskVariant variant = MaskVariant::Full;
    double iou = 0.0;
    double mse_head = 0.0;
    double mse_outside = 0.0;
    ProbeScore attr_probe;
    double runtime_ms = 0.0;
};

/// One JSON object per line; the field set is exactly PairRecord's.
std::string to_json_line(const PairRecord& rec);
/// Throws Error on malformed lines or a wrong field set.
PairRecord parse_json_line(const std::string& line);

struct RunConfig {
    SwapConfig swap{};
    std::uint64_t seed = 0;
    int pairs = 1;
    std::vector<MaskVariant> variants = {MaskVariant::Full};
    std::filesystem::path out_dir;
    bool write_images = true;
    /// runtime_ms is wall-clock time when set, 0 otherwise (keeps reruns byte-identical).
    bool record_timing = false;
    unsigned threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

struct VariantSummary {
    std::size_t count = 0;
    double mean_iou = 0.0;
    double mean_mse_head = 0.0;
    double mean_mse_outside = 0.0;
    double mean_probe = 0.0;  // mean of matched / total
    double mean_runtime_ms = 0.0;
};

using Summary = std::map<std::string, VariantSummary>;

Summary summarize(const std::vector<PairRecord>& records);
void print_summary(const Summary& summary, std::ostream& out);

/// Seeded (body, head) pairs. Pairs whose oracle swap renders identically to
/// the body (including body = head) are rejected.
std::vector<std::pair<AttributeSpec, AttributeSpec>> sample_pairs(std::uint64_t seed, int count);

/// Metrics of one swap against synthetic ground truth.
PairRecord evaluate_swap(const std::string& pair_id, const AttributeSpec& body,
                         const AttributeSpec& head, const SwapResult& result,
                         MaskVariant variant);

struct ExperimentResult {
    std::vector<PairRecord> records;
    Summary summary;
};

/// Runs every sampled pair under every requested variant. Pairs run on worker
/// threads; records are written to out_dir/metrics.jsonl by a single writer in
/// (pair, variant) order. Images go to out_dir/pairs/ when enabled.
ExperimentResult run_experiment(const RunConfig& cfg, const NoisePredictor& pred);

std::vector<PairRecord> read_metrics(const std::filesystem::path& path);

}  // namespace hid
