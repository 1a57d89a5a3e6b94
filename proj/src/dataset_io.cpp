#include "tap/dataset_io.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "tap/util.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset format assumes a little-endian host");

namespace tap {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'T', 'A', 'P', 'V'};
constexpr std::uint32_t kVersion = 1;

std::string encode_video(const VideoRecord& v) {
    std::string buf;
    auto put_u32 = [&](std::uint32_t x) {
        char raw[4];
        std::memcpy(raw, &x, 4);
        buf.append(raw, 4);
    };
    auto put_i32 = [&](std::int32_t x) {
        char raw[4];
        std::memcpy(raw, &x, 4);
        buf.append(raw, 4);
    };
    buf.append(kMagic, 4);
    put_u32(kVersion);
    put_u32(static_cast<std::uint32_t>(v.frame_count));
    put_u32(static_cast<std::uint32_t>(v.feature_dim));
    put_u32(static_cast<std::uint32_t>(v.ground_truths.size()));
    for (const auto& gt : v.ground_truths) {
        put_i32(gt.window.left);
        put_i32(gt.window.right);
        put_i32(gt.class_id);
    }
    const std::size_t bytes = v.frame_features.size() * sizeof(float);
    buf.append(reinterpret_cast<const char*>(v.frame_features.data()), bytes);
    return buf;
}

VideoRecord decode_video(const std::filesystem::path& path, const std::string& id, int class_count) {
    const auto buf = read_file_bytes(path);
    std::size_t off = 0;
    auto need = [&](std::size_t n) {
        if (off + n > buf.size()) throw DataError("truncated video file: " + path.string());
    };
    need(4);
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw DataError("not a video file: " + path.string());
    off = 4;
    auto take_u32 = [&] {
        need(4);
        std::uint32_t x;
        std::memcpy(&x, buf.data() + off, 4);
        off += 4;
        return x;
    };
    if (take_u32() != kVersion) throw DataError("unsupported video file version: " + path.string());

    VideoRecord v;
    v.id = id;
    v.class_count = class_count;
    v.frame_count = static_cast<int>(take_u32());
    v.feature_dim = static_cast<int>(take_u32());
    const std::uint32_t gt_count = take_u32();
    for (std::uint32_t i = 0; i < gt_count; ++i) {
        GroundTruth gt;
        gt.window.left = static_cast<std::int32_t>(take_u32());
        gt.window.right = static_cast<std::int32_t>(take_u32());
        gt.class_id = static_cast<std::int32_t>(take_u32());
        if (!gt.window.valid_in(v.frame_count) || gt.class_id < 0 || gt.class_id >= class_count)
            throw DataError("invalid ground truth in " + path.string());
        v.ground_truths.push_back(gt);
    }
    const std::size_t values = static_cast<std::size_t>(v.frame_count) * v.feature_dim;
    need(values * sizeof(float));
    v.frame_features.resize(values);
    std::memcpy(v.frame_features.data(), buf.data() + off, values * sizeof(float));
    off += values * sizeof(float);
    if (off != buf.size()) throw DataError("trailing bytes in video file: " + path.string());
    return v;
}

}  // namespace

const VideoRecord* Dataset::find_video(const std::string& id) const {
    for (const auto& v : videos)
        if (v.id == id) return &v;
    return nullptr;
}

std::vector<VideoRecord> Dataset::videos_for_class(int c) const {
    std::vector<VideoRecord> out;
    for (const auto& v : videos) {
        VideoRecord filtered = v;
        filtered.ground_truths.clear();
        for (const auto& gt : v.ground_truths)
            if (gt.class_id == c) filtered.ground_truths.push_back(gt);
        if (!filtered.ground_truths.empty()) out.push_back(std::move(filtered));
    }
    return out;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["format"] = "tap-dataset-v1";
    manifest["seed"] = ds.seed;
    manifest["feature_dim"] = ds.spec.feature_dim;
    manifest["class_count"] = ds.spec.class_count();
    json spec;
    spec["video_count"] = ds.spec.video_count;
    spec["len_min"] = ds.spec.len_min;
    spec["len_max"] = ds.spec.len_max;
    spec["k_min"] = ds.spec.k_min;
    spec["k_max"] = ds.spec.k_max;
    spec["gap_min"] = ds.spec.gap_min;
    spec["inst_len_min"] = ds.spec.inst_len_min;
    spec["inst_len_max"] = ds.spec.inst_len_max;
    spec["sigma"] = ds.spec.sigma;
    spec["ramp"] = ds.spec.ramp;
    spec["feature_dim"] = ds.spec.feature_dim;
    spec["class_names"] = ds.spec.class_names;
    manifest["spec"] = spec;
    json videos = json::array();
    for (const auto& v : ds.videos) videos.push_back(v.id);
    manifest["videos"] = videos;
    atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    for (const auto& v : ds.videos) {
        atomic_write_file(dir / (v.id + ".tapv"), encode_video(v));
    }
}

Dataset load_dataset(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    json manifest;
    try {
        manifest = json::parse(read_file_text(manifest_path));
    } catch (const json::exception& e) {
        throw DataError("bad manifest " + manifest_path.string() + ": " + e.what());
    }
    if (manifest.value("format", "") != "tap-dataset-v1")
        throw DataError("unknown dataset format in " + manifest_path.string());

    Dataset ds;
    try {
        ds.seed = manifest.at("seed").get<std::uint64_t>();
        const json& spec = manifest.at("spec");
        ds.spec.video_count = spec.at("video_count").get<int>();
        ds.spec.len_min = spec.at("len_min").get<int>();
        ds.spec.len_max = spec.at("len_max").get<int>();
        ds.spec.k_min = spec.at("k_min").get<int>();
        ds.spec.k_max = spec.at("k_max").get<int>();
        ds.spec.gap_min = spec.at("gap_min").get<int>();
        ds.spec.inst_len_min = spec.at("inst_len_min").get<int>();
        ds.spec.inst_len_max = spec.at("inst_len_max").get<int>();
        ds.spec.sigma = spec.at("sigma").get<double>();
        ds.spec.ramp = spec.at("ramp").get<int>();
        ds.spec.feature_dim = spec.at("feature_dim").get<int>();
        ds.spec.class_names = spec.at("class_names").get<std::vector<std::string>>();

        const auto ids = manifest.at("videos").get<std::vector<std::string>>();
        ds.videos.resize(ids.size());
        parallel_for(static_cast<int>(ids.size()), [&](int i) {
            ds.videos[i] = decode_video(dir / (ids[i] + ".tapv"), ids[i], ds.spec.class_count());
        });
    } catch (const json::exception& e) {
        throw DataError("bad manifest " + manifest_path.string() + ": " + e.what());
    }
    return ds;
}

}  // namespace tap
