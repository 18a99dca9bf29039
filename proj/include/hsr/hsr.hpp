#pragma once

// Hard-sample rectification for clustering-based unsupervised re-ID, end to
// end in embedding space: density pseudo-labeling, inter-camera mutual
// mining, part-based cluster splitting, and the joint training loop.

#include "hsr/ablate.hpp"
#include "hsr/common.hpp"
#include "hsr/dataset.hpp"
#include "hsr/dbscan.hpp"
#include "hsr/distance.hpp"
#include "hsr/eval.hpp"
#include "hsr/icm.hpp"
#include "hsr/kmeans.hpp"
#include "hsr/labels.hpp"
#include "hsr/losses.hpp"
#include "hsr/model.hpp"
#include "hsr/pbh.hpp"
#include "hsr/run_config.hpp"
#include "hsr/sampler.hpp"
#include "hsr/silhouette.hpp"
#include "hsr/synth.hpp"
#include "hsr/trainer.hpp"
