#pragma once

#include "motionzip/codec.hpp"
#include "motionzip/error.hpp"
#include "motionzip/frame.hpp"
#include "motionzip/metrics.hpp"
#include "motionzip/motion.hpp"
#include "motionzip/pipeline.hpp"
#include "motionzip/queue.hpp"
#include "motionzip/reconstruct.hpp"
#include "motionzip/sidecar.hpp"
#include "motionzip/stream.hpp"
#include "motionzip/y4m.hpp"
