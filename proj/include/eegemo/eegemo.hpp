#pragma once

// Everything: dataset I/O, preprocessing, DWT features, PCA, classifiers,
// cross-validation and run configuration.

#include "ann.hpp"
#include "bands.hpp"
#include "config.hpp"
#include "core.hpp"
#include "dataset.hpp"
#include "eval.hpp"
#include "features.hpp"
#include "io_util.hpp"
#include "knn.hpp"
#include "models.hpp"
#include "pca.hpp"
#include "pipeline.hpp"
#include "preprocess.hpp"
#include "svm.hpp"
#include "wavelet.hpp"
