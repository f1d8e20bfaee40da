#pragma once

#include "sharp/baseline_fit.hpp"
#include "sharp/commands.hpp"
#include "sharp/errors.hpp"
#include "sharp/geometry.hpp"
#include "sharp/io_formats.hpp"
#include "sharp/kdtree.hpp"
#include "sharp/labels.hpp"
#include "sharp/matching.hpp"
#include "sharp/metrics_segmentation.hpp"
#include "sharp/metrics_track1.hpp"
#include "sharp/point.hpp"
#include "sharp/synthetic.hpp"
#include "sharp/vocabulary.hpp"
