#include "data_synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "errors.hpp"
#include "rng.hpp"

namespace lcfed {

namespace {

constexpr std::uint64_t kTagTeacher = 0x7465616368ULL; // "teach"
constexpr std::uint64_t kTagDevice = 0x646576ULL;      // "dev"
constexpr std::uint64_t kTagPartition = 0x70617274ULL; // "part"

int teacher_argmax(const std::vector<double>& w, const std::vector<double>& b,
                   const double* x, int input_dim, int classes) {
    int best = 0;
    double best_v = 0.0;
    for (int c = 0; c < classes; ++c) {
        double v = b[static_cast<std::size_t>(c)];
        const double* row = w.data() + static_cast<std::size_t>(c) * input_dim;
        for (int j = 0; j < input_dim; ++j) v += row[j] * x[j];
        if (c == 0 || v > best_v) {
            best_v = v;
            best = c;
        }
    }
    return best;
}

Examples draw_from_teacher(const std::vector<double>& w,
                           const std::vector<double>& b, int input_dim,
                           int classes, int count, Rng& rng) {
    Examples out;
    out.feature_dim = static_cast<std::size_t>(input_dim);
    out.features.reserve(static_cast<std::size_t>(count) * input_dim);
    out.labels.reserve(static_cast<std::size_t>(count));
    std::vector<double> x(static_cast<std::size_t>(input_dim));
    for (int i = 0; i < count; ++i) {
        for (auto& v : x) v = rng.normal(0.0, 1.0);
        int y = teacher_argmax(w, b, x.data(), input_dim, classes);
        out.features.insert(out.features.end(), x.begin(), x.end());
        out.labels.push_back(y);
    }
    return out;
}

// Stratified 80/20 split: per label group, floor(|g|/5) examples go to
// test; groups smaller than 5 contribute none. A shard whose every group
// is tiny still gets a test set by falling back to an unstratified floor
// split of the whole shard.
void split_train_test(const Examples& shard, Examples& train, Examples& test) {
    train.feature_dim = shard.feature_dim;
    test.feature_dim = shard.feature_dim;
    const std::size_t n = shard.labels.size();
    if (n == 0) return;

    int max_label = 0;
    for (int y : shard.labels) max_label = std::max(max_label, y);
    std::vector<std::vector<std::size_t>> groups(
        static_cast<std::size_t>(max_label) + 1);
    for (std::size_t i = 0; i < n; ++i)
        groups[static_cast<std::size_t>(shard.labels[i])].push_back(i);

    std::vector<bool> to_test(n, false);
    std::size_t test_count = 0;
    for (const auto& g : groups) {
        std::size_t take = g.size() / 5;
        for (std::size_t i = 0; i < take; ++i) {
            to_test[g[g.size() - 1 - i]] = true;
            ++test_count;
        }
    }
    if (test_count == 0 && n >= 2) {
        // all label groups tiny: take the last fifth (at least one example)
        std::size_t take = std::max<std::size_t>(1, n / 5);
        for (std::size_t i = 0; i < take; ++i) to_test[n - 1 - i] = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = to_test[i] ? test : train;
        dst.push_back(shard.row(i), shard.labels[i]);
    }
}

std::uint32_t read_be32(const unsigned char* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) |
           (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) |
           static_cast<std::uint32_t>(p[3]);
}

} // namespace

std::vector<DeviceShard> make_synthetic_clusters(int k_true, int m,
                                                 int input_dim, int classes,
                                                 int samples_per_device,
                                                 std::uint64_t seed) {
    if (k_true < 1 || m < 1 || input_dim < 1 || classes < 2 ||
        samples_per_device < 1)
        throw ConfigError("make_synthetic_clusters: k_true/m/input_dim/"
                          "classes/samples_per_device out of range");
    if (k_true > m)
        throw ConfigError("make_synthetic_clusters: k_true exceeds m");

    // One linear-softmax teacher per concept: a component shared by every
    // concept plus a concept-specific delta. The shared part (the larger
    // scale) gives the concepts common structure a global model can
    // exploit; the deltas make them disagree enough that one model cannot
    // fit them all.
    constexpr double kSharedScale = 2.8;
    constexpr double kDeltaScale = 1.6;
    const std::size_t wlen = static_cast<std::size_t>(classes) * input_dim;
    std::vector<double> sw(wlen);
    std::vector<double> sb(static_cast<std::size_t>(classes));
    {
        Rng srng(mix_seed({seed, kTagTeacher, 0x676c6f62ULL})); // "glob"
        for (auto& v : sw) v = srng.normal(0.0, kSharedScale);
        for (auto& v : sb) v = srng.normal(0.0, 0.5);
    }
    std::vector<std::vector<double>> tw(static_cast<std::size_t>(k_true));
    std::vector<std::vector<double>> tb(static_cast<std::size_t>(k_true));
    for (int k = 0; k < k_true; ++k) {
        Rng trng(mix_seed({seed, kTagTeacher, static_cast<std::uint64_t>(k)}));
        auto& w = tw[static_cast<std::size_t>(k)];
        auto& b = tb[static_cast<std::size_t>(k)];
        w.resize(wlen);
        b.resize(static_cast<std::size_t>(classes));
        for (std::size_t i = 0; i < wlen; ++i)
            w[i] = sw[i] + trng.normal(0.0, kDeltaScale);
        for (std::size_t i = 0; i < b.size(); ++i)
            b[i] = sb[i] + trng.normal(0.0, 0.5);
    }

    std::vector<DeviceShard> shards;
    shards.reserve(static_cast<std::size_t>(m));
    const int test_count = std::max(1, samples_per_device / 5);
    for (int i = 0; i < m; ++i) {
        int k = i % k_true;
        Rng drng(mix_seed({seed, kTagDevice, static_cast<std::uint64_t>(i)}));
        DeviceShard s;
        s.device_id = i;
        s.true_cluster = k;
        s.train = draw_from_teacher(tw[static_cast<std::size_t>(k)],
                                    tb[static_cast<std::size_t>(k)], input_dim,
                                    classes, samples_per_device, drng);
        s.test = draw_from_teacher(tw[static_cast<std::size_t>(k)],
                                   tb[static_cast<std::size_t>(k)], input_dim,
                                   classes, test_count, drng);
        shards.push_back(std::move(s));
    }
    return shards;
}

std::vector<DeviceShard> dirichlet_partition(const Examples& dataset,
                                             const PartitionSpec& spec) {
    if (spec.m < 1) throw ConfigError("dirichlet_partition: m must be >= 1");
    if (!(spec.alpha > 0.0))
        throw ConfigError("dirichlet_partition: alpha must be > 0");
    const std::size_t n = dataset.labels.size();
    if (n < static_cast<std::size_t>(spec.m))
        throw ConfigError("dirichlet_partition: fewer examples than devices");

    const int classes = dataset.num_classes();
    const auto md = static_cast<std::size_t>(spec.m);
    Rng rng(mix_seed({spec.seed, kTagPartition}));

    // Per-class device proportions, then per-example categorical routing.
    std::vector<std::vector<std::size_t>> members(md);
    for (int c = 0; c < classes; ++c) {
        std::vector<double> props = rng.dirichlet(spec.alpha, md);
        for (std::size_t i = 0; i < n; ++i) {
            if (dataset.labels[i] != c) continue;
            std::size_t dev = rng.categorical(props);
            members[dev].push_back(i);
        }
    }

    // Repair empty shards: steal one example from the current largest.
    for (std::size_t d = 0; d < md; ++d) {
        if (!members[d].empty()) continue;
        std::size_t donor = 0;
        for (std::size_t j = 1; j < md; ++j)
            if (members[j].size() > members[donor].size()) donor = j;
        if (members[donor].size() <= 1)
            throw ConfigError("dirichlet_partition: not enough examples to "
                              "populate every device");
        members[d].push_back(members[donor].back());
        members[donor].pop_back();
    }

    std::vector<DeviceShard> shards(md);
    for (std::size_t d = 0; d < md; ++d) {
        shards[d].device_id = static_cast<int>(d);
        Examples whole = dataset.subset(members[d]);
        split_train_test(whole, shards[d].train, shards[d].test);
    }
    return shards;
}

std::vector<DeviceShard> pathological_partition(const Examples& dataset,
                                                const PartitionSpec& spec) {
    if (spec.m < 1)
        throw ConfigError("pathological_partition: m must be >= 1");
    const int classes = dataset.num_classes();
    const int lpd = spec.labels_per_device;
    if (lpd < 1 || lpd > classes)
        throw ConfigError("pathological_partition: labels_per_device must be "
                          "in [1, num_classes]");

    // Group example indices by label.
    std::vector<std::vector<std::size_t>> by_label(
        static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < dataset.labels.size(); ++i)
        by_label[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
    for (int c = 0; c < classes; ++c)
        if (by_label[static_cast<std::size_t>(c)].size() <
            static_cast<std::size_t>((static_cast<long long>(spec.m) * lpd +
                                      classes - 1) /
                                     classes))
            throw ConfigError(
                "pathological_partition: label " + std::to_string(c) +
                " has too few examples for the requested device count");

    // Device i draws labels {(i*lpd + j) mod classes : j < lpd}; per label,
    // its claimants split that label's examples into contiguous chunks.
    std::vector<std::vector<int>> claimants(static_cast<std::size_t>(classes));
    for (int i = 0; i < spec.m; ++i)
        for (int j = 0; j < lpd; ++j)
            claimants[static_cast<std::size_t>((static_cast<long long>(i) * lpd + j) %
                                               classes)]
                .push_back(i);

    std::vector<std::vector<std::size_t>> members(
        static_cast<std::size_t>(spec.m));
    for (int c = 0; c < classes; ++c) {
        const auto& pool = by_label[static_cast<std::size_t>(c)];
        const auto& who = claimants[static_cast<std::size_t>(c)];
        if (who.empty()) continue;
        const std::size_t share = pool.size() / who.size();
        std::size_t extra = pool.size() % who.size();
        std::size_t pos = 0;
        for (std::size_t t = 0; t < who.size(); ++t) {
            std::size_t take = share + (t < extra ? 1 : 0);
            auto& dst = members[static_cast<std::size_t>(who[t])];
            for (std::size_t u = 0; u < take; ++u) dst.push_back(pool[pos++]);
        }
    }

    std::vector<DeviceShard> shards(static_cast<std::size_t>(spec.m));
    for (int d = 0; d < spec.m; ++d) {
        auto& s = shards[static_cast<std::size_t>(d)];
        s.device_id = d;
        Examples whole = dataset.subset(members[static_cast<std::size_t>(d)]);
        split_train_test(whole, s.train, s.test);
    }
    return shards;
}

IdxData load_idx(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    auto need = [&](std::size_t offset, std::size_t len) {
        if (buf.size() < offset + len)
            throw FormatError(path + ": truncated at byte offset " +
                              std::to_string(buf.size()) + ", needed " +
                              std::to_string(offset + len));
    };
    need(0, 4);
    const std::uint32_t magic = read_be32(buf.data());
    IdxData out;
    if (magic == 0x00000803u) {
        need(4, 12);
        out.is_images = true;
        out.count = read_be32(buf.data() + 4);
        out.rows = read_be32(buf.data() + 8);
        out.cols = read_be32(buf.data() + 12);
        const std::size_t total = out.count * out.rows * out.cols;
        need(16, total);
        if (buf.size() != 16 + total)
            throw FormatError(path + ": trailing bytes at offset " +
                              std::to_string(16 + total));
        out.images.resize(total);
        for (std::size_t i = 0; i < total; ++i)
            out.images[i] = static_cast<double>(buf[16 + i]) / 255.0;
    } else if (magic == 0x00000801u) {
        need(4, 4);
        out.count = read_be32(buf.data() + 4);
        need(8, out.count);
        if (buf.size() != 8 + out.count)
            throw FormatError(path + ": trailing bytes at offset " +
                              std::to_string(8 + out.count));
        out.labels.resize(out.count);
        for (std::size_t i = 0; i < out.count; ++i)
            out.labels[i] = static_cast<int>(buf[8 + i]);
    } else {
        char msg[96];
        std::snprintf(msg, sizeof msg,
                      "unrecognized magic 0x%08x at byte offset 0", magic);
        throw FormatError(path + ": " + msg);
    }
    return out;
}

Examples load_idx_dataset(const std::string& images_path,
                          const std::string& labels_path) {
    IdxData imgs = load_idx(images_path);
    IdxData labs = load_idx(labels_path);
    if (!imgs.is_images)
        throw FormatError(images_path + ": expected an image file");
    if (labs.is_images)
        throw FormatError(labels_path + ": expected a label file");
    if (imgs.count != labs.count)
        throw FormatError("image/label count mismatch: " +
                          std::to_string(imgs.count) + " vs " +
                          std::to_string(labs.count));
    Examples out;
    out.feature_dim = imgs.rows * imgs.cols;
    out.features = std::move(imgs.images);
    out.labels = std::move(labs.labels);
    return out;
}

} // namespace lcfed
