#pragma once

#include <string>

#include "fedrl/agents/agent.hpp"

namespace fedrl {

// Versioned little-endian binary checkpoint: magic, format version, family
// tag, then the agent body. All 64-bit values round-trip exactly.
void save_checkpoint(const std::string& path, const Agent& agent);

// Reconstructs the agent (hyperparameters must match the training run for
// the NN families, since they fix tensor shapes).
std::unique_ptr<Agent> load_checkpoint(const std::string& path, const AgentHyper& hyper);

// Family stored in a checkpoint without loading the body.
AgentFamily peek_checkpoint_family(const std::string& path);

}  // namespace fedrl
