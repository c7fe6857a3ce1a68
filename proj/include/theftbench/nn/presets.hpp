#pragma once

#include <string>
#include <vector>

#include "theftbench/nn/model.hpp"

namespace theftbench::nn {

// The six detector models: f_* belong to the utility (defender), fp_* to the
// thief (attacker, trained on its own data).
//
//   f_fnn   48 -> D128 -> D256 -> D128 -> Drop.25 -> D32 -> Drop.25 -> D2
//   fp_fnn  48 -> D168 -> D328 -> D168 -> D128 -> Drop.25 -> D64 -> Drop.25 -> D2
//   f_rnn   48x1 -> L256 -> Drop.25 -> L168 -> Drop.25 -> L128 -> D2
//   fp_rnn  48x1 -> L246 -> Drop.25 -> L148 -> Drop.25 -> L108 -> D2
//   f_cnn   6x8 -> C128 -> C128 -> Pool -> Drop.25 -> Flatten -> D32 -> D2
//   fp_cnn  6x8 -> C156 -> C214 -> Pool -> Drop.25 -> Flatten -> D48 -> D2
//
// Hidden Dense/Conv layers use ReLU. Stacked LSTMs return sequences except
// the last, whose final hidden state feeds the softmax head.
const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);

// Throws ArchitectureError for unknown names.
ModelArchitecture preset(const std::string& name);

// Same topology with every unit/filter count divided by `divisor` (min 2).
ModelArchitecture scaled_preset(const std::string& name, std::size_t divisor);

// Display name, e.g. "f'_RNN" for fp_rnn.
std::string display_name(const std::string& preset_name);

}  // namespace theftbench::nn
