#pragma once

// Umbrella header.
#include "ptav/config.hpp"
#include "ptav/correlation_filter.hpp"
#include "ptav/dcf_tracker.hpp"
#include "ptav/engine.hpp"
#include "ptav/evaluation.hpp"
#include "ptav/event_log.hpp"
#include "ptav/features.hpp"
#include "ptav/geometry.hpp"
#include "ptav/key_value.hpp"
#include "ptav/message_queue.hpp"
#include "ptav/metrics.hpp"
#include "ptav/scale_filter.hpp"
#include "ptav/scripted_verifier.hpp"
#include "ptav/sequence.hpp"
#include "ptav/synthetic.hpp"
#include "ptav/verifier.hpp"
