#include "fedrl/agents/checkpoint.hpp"

#include <fstream>

#include "fedrl/agents/deep.hpp"
#include "fedrl/errors.hpp"

namespace fedrl {

namespace {

constexpr char kMagic[8] = {'F', 'R', 'L', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint64_t kVersion = 1;

AgentFamily read_header(std::istream& is, const std::string& path) {
    char magic[8];
    is.read(magic, 8);
    if (!is || !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
        throw IoError("not a checkpoint file: " + path);
    }
    const std::uint64_t version = ckpt::read_u64(is);
    if (version != kVersion) {
        throw IoError("unsupported checkpoint version " + std::to_string(version) + " in " + path);
    }
    const std::uint64_t len = ckpt::read_u64(is);
    std::string name(len, '\0');
    is.read(name.data(), static_cast<std::streamsize>(len));
    if (!is) throw IoError("checkpoint truncated: " + path);
    return family_from_name(name);
}

}  // namespace

void save_checkpoint(const std::string& path, const Agent& agent) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write checkpoint: " + path);
    os.write(kMagic, 8);
    ckpt::write_u64(os, kVersion);
    const std::string name = family_name(agent.family());
    ckpt::write_u64(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    agent.save(os);
    if (!os) throw IoError("failed writing checkpoint: " + path);
}

std::unique_ptr<Agent> load_checkpoint(const std::string& path, const AgentHyper& hyper) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    const AgentFamily family = read_header(is, path);
    auto agent = make_agent(family, hyper, 0, 0);
    agent->load(is);
    return agent;
}

AgentFamily peek_checkpoint_family(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    return read_header(is, path);
}

}  // namespace fedrl
