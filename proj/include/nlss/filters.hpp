#pragma once

#include "nlss/tensor.hpp"

#include <cstddef>
#include <vector>

namespace nlss {

// Full Tucker transform of the group, zero every core entry with magnitude
// strictly below tau (entries equal to tau survive), invert.
Tensor hosvd_hard(const Tensor& group, double tau);

// Keep only the first multirank[i] columns of the mode-i factor; modes
// beyond the list keep full rank.  Ranks must be >= 1 and <= the extent.
Tensor hosvd_truncate(const Tensor& group, const std::vector<std::size_t>& multirank);

// Matrix-domain filter on the group-mode unfolding G (last mode): the group
// transform U comes from the channel-summed (opponent) group when the group
// is ps x ps x 3 x K, otherwise from the group itself; the patch transform V
// is the thin left factor of G^T.  The core U^T G V is hard-thresholded at
// tau and the product is inverted and folded back.
Tensor msvd_hard(const Tensor& group, double tau);

}  // namespace nlss
