#include "ladderdet/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "ladderdet/errors.hpp"

namespace ladderdet {

namespace {

using json = nlohmann::json;

constexpr char kMagic[8] = {'L', 'D', 'E', 'T', 'N', 'E', 'T', '1'};

json config_to_json(const NetConfig& cfg) {
    json blocks = json::array();
    for (const auto& b : cfg.conv_blocks)
        blocks.push_back({{"out_channels", b.out_channels}, {"pool", b.pool}});
    return json{{"input_size", cfg.input_size},
                {"conv_blocks", blocks},
                {"fc_sizes", cfg.fc_sizes}};
}

NetConfig config_from_json(const json& j) {
    NetConfig cfg;
    cfg.input_size = j.at("input_size").get<int>();
    cfg.conv_blocks.clear();
    for (const auto& b : j.at("conv_blocks"))
        cfg.conv_blocks.push_back({b.at("out_channels").get<int>(), b.at("pool").get<bool>()});
    cfg.fc_sizes = j.at("fc_sizes").get<std::vector<int>>();
    cfg.validate();
    return cfg;
}

/// Every stored array, in a fixed order: trainables, running stats, Adam
/// first/second moments.
struct BufferRef {
    std::string name;
    float* data;
    size_t size;
};

std::vector<BufferRef> all_buffers(NetParams<float>& p) {
    std::vector<BufferRef> out;
    for (auto v : collect_trainables<float>(p)) out.push_back({v.name, v.data, v.size});
    for (size_t i = 0; i < p.conv.size(); ++i) {
        auto& l = p.conv[i];
        const std::string pre = "conv" + std::to_string(i) + ".";
        out.push_back({pre + "run_mean", l.run_mean.data(), l.run_mean.size()});
        out.push_back({pre + "run_var", l.run_var.data(), l.run_var.size()});
    }
    auto trainables = collect_trainables<float>(p);
    for (size_t i = 0; i < trainables.size(); ++i) {
        out.push_back({"adam.m." + trainables[i].name, p.adam.m[i].data(), p.adam.m[i].size()});
        out.push_back({"adam.v." + trainables[i].name, p.adam.v[i].data(), p.adam.v[i].size()});
    }
    return out;
}

} // namespace

void save_checkpoint(const std::string& path, const NetConfig& cfg,
                     const NetParams<float>& params) {
    auto& mut = const_cast<NetParams<float>&>(params);
    auto buffers = all_buffers(mut);

    json header{{"format_version", kCheckpointFormatVersion},
                {"dtype", "f32"},
                {"config", config_to_json(cfg)},
                {"adam_step", params.adam.step}};
    json table = json::array();
    for (const auto& b : buffers) table.push_back({{"name", b.name}, {"size", b.size}});
    header["buffers"] = table;
    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t hlen = header_str.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(header_str.data(), static_cast<std::streamsize>(hlen));
    for (const auto& b : buffers)
        out.write(reinterpret_cast<const char*>(b.data),
                  static_cast<std::streamsize>(b.size * sizeof(float)));
    if (!out) throw DataError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a checkpoint file: " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in || hlen > (1u << 20)) throw DataError("corrupt checkpoint header: " + path);
    std::string header_str(hlen, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw DataError("corrupt checkpoint header: " + path);

    json header;
    try {
        header = json::parse(header_str);
    } catch (const json::exception& e) {
        throw DataError("corrupt checkpoint header: " + std::string(e.what()));
    }
    if (header.at("format_version").get<int>() != kCheckpointFormatVersion)
        throw DataError("unsupported checkpoint format version");
    if (header.at("dtype").get<std::string>() != "f32")
        throw DataError("unsupported checkpoint dtype");

    Checkpoint ck;
    ck.config = config_from_json(header.at("config"));
    ck.params = init_params<float>(ck.config, 0);
    ck.params.adam.step = header.at("adam_step").get<long>();

    auto buffers = all_buffers(ck.params);
    const auto& table = header.at("buffers");
    if (table.size() != buffers.size())
        throw DataError("checkpoint buffer table does not match architecture");
    for (size_t i = 0; i < buffers.size(); ++i) {
        const auto& entry = table[i];
        if (entry.at("name").get<std::string>() != buffers[i].name ||
            entry.at("size").get<size_t>() != buffers[i].size)
            throw DataError("checkpoint buffer mismatch at " + buffers[i].name);
        in.read(reinterpret_cast<char*>(buffers[i].data),
                static_cast<std::streamsize>(buffers[i].size * sizeof(float)));
        if (!in) throw DataError("truncated checkpoint data: " + path);
    }
    return ck;
}

} // namespace ladderdet
