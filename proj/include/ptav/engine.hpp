#pragma once

#include <chrono>
#include <deque>
#include <exception>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ptav/dcf_tracker.hpp"
#include "ptav/event_log.hpp"
#include "ptav/geometry.hpp"
#include "ptav/message_queue.hpp"
#include "ptav/verifier.hpp"

namespace ptav {

enum class ExecutionMode { parallel, deterministic };

struct EngineConfig {
  int interval_default = 10;  // V
  int interval_min = 1;
  ExecutionMode mode = ExecutionMode::deterministic;
  // Deterministic mode: a request at frame k is answered once the tracker
  // has finished frame k + latency_frames.
  int latency_frames = 2;
  std::chrono::milliseconds verifier_delay{0};
  std::size_t queue_capacity = 16;
};

inline void validate(const EngineConfig& c) {
  if (c.interval_min < 1) throw ConfigError("V_min must be >= 1");
  if (c.interval_default < c.interval_min) throw ConfigError("V must be >= V_min");
  if (c.latency_frames < 0) throw ConfigError("latency must be >= 0");
  if (c.verifier_delay.count() < 0) throw ConfigError("verifier delay must be >= 0");
}

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct VerifyRequest {
  int frame = 0;
  int epoch = 0;  // tracker corrections seen when the request was sent
  BoundingBox box;
  Frame image;
};

struct VerifyResponse {
  int frame = 0;
  int epoch = 0;
  bool passed = false;
  double score = 0.0;
  std::optional<BoundingBox> correction;
  int interval = 10;
  double beta = 1.5;
};

template <class State>
struct ModelSnapshot {
  int frame = 0;
  State state;
  BoundingBox box;
};

struct RunResult {
  std::vector<BoundingBox> boxes;
  std::shared_ptr<EventLog> log;
  int requests = 0;
  int corrections = 0;
  double seconds = 0.0;
  std::vector<double> step_ms;  // tracking-step latency per tracked frame
};

namespace detail {

inline std::string box_fields(const BoundingBox& b) {
  return "x=" + fmt_num(b.x()) + " y=" + fmt_num(b.y()) + " w=" + fmt_num(b.w()) + " h=" + fmt_num(b.h());
}

}  // namespace detail

/// The tracking side: owns the tracker, its per-frame snapshots since the last
/// answered request, the output boxes, and the verification schedule.
template <TrackerModel Tracker>
class TrackingWorker {
 public:
  using Snapshot = ModelSnapshot<typename Tracker::State>;

  TrackingWorker(Tracker tracker, std::span<const Frame> frames, const EngineConfig& cfg, EventLog& log)
      : tracker_(std::move(tracker)), frames_(frames), cfg_(cfg), log_(log), interval_(cfg.interval_default) {}

  void initialize(const BoundingBox& init) {
    tracker_.initialize(frames_[0], init);
    outputs_.assign(1, init);
    snapshots_.clear();
    snapshots_.push_back({0, tracker_.state(), init});
    current_ = 0;
    last_request_ = 0;
  }

  std::optional<VerifyRequest> step(int k) {
    if (k != current_ + 1 || k >= static_cast<int>(frames_.size())) {
      throw ProtocolError("tracking_step: frames must be processed in order");
    }
    const auto t0 = std::chrono::steady_clock::now();
    current_ = k;
    const BoundingBox box = tracker_.track(frames_[static_cast<std::size_t>(k)]);
    outputs_.push_back(box);
    snapshots_.push_back({k, tracker_.state(), box});
    log_.record(k, EventType::update);
    std::optional<VerifyRequest> req;
    if (k - last_request_ >= interval_) {
      last_request_ = k;
      ++requests_;
      log_.record(k, EventType::request, detail::box_fields(box));
      req = VerifyRequest{k, epoch_, box, frames_[static_cast<std::size_t>(k)]};
    }
    step_ms_.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    return req;
  }

  void handle_feedback(const VerifyResponse& r) {
    if (snapshots_.empty() || r.frame > current_ || r.frame < snapshots_.front().frame) {
      log_.record(r.frame, EventType::stale, "reason=unknown_frame");
      return;
    }
    if (r.interval != interval_) {
      log_.record(current_, EventType::v_change,
                  "from=" + std::to_string(interval_) + " to=" + std::to_string(r.interval));
      interval_ = r.interval;
    }
    if (r.epoch != epoch_) {
      // Sent before a later correction; its verdict refers to discarded boxes.
      log_.record(r.frame, EventType::stale, "reason=superseded_epoch");
      return;
    }
    if (!r.passed && r.correction) trace_back_and_resume(r.frame, *r.correction);
    trim_before(r.frame);
  }

  void trace_back_and_resume(int anchor, const BoundingBox& corrected) {
    if (anchor < 1 || anchor > current_) throw ProtocolError("trace_back: anchor outside tracked range");
    auto it = snapshots_.begin();
    while (it != snapshots_.end() && it->frame != anchor - 1) ++it;
    if (it == snapshots_.end()) {
      throw ProtocolError("trace_back: no snapshot for frame " + std::to_string(anchor - 1));
    }
    tracker_.restore(it->state);
    tracker_.relearn(frames_[static_cast<std::size_t>(anchor)], corrected);
    log_.record(anchor, EventType::correct, detail::box_fields(corrected));
    log_.record(anchor, EventType::update);
    outputs_[static_cast<std::size_t>(anchor)] = corrected;
    snapshots_.erase(std::next(it), snapshots_.end());
    snapshots_.push_back({anchor, tracker_.state(), corrected});

    for (int j = anchor + 1; j <= current_; ++j) {
      const BoundingBox box = tracker_.track(frames_[static_cast<std::size_t>(j)]);
      log_.record(j, EventType::replay, "anchor=" + std::to_string(anchor));
      log_.record(j, EventType::update);
      outputs_[static_cast<std::size_t>(j)] = box;
      snapshots_.push_back({j, tracker_.state(), box});
    }
    last_request_ = anchor;
    ++epoch_;
    ++corrections_;
  }

  const std::vector<BoundingBox>& outputs() const { return outputs_; }
  const std::deque<Snapshot>& snapshots() const { return snapshots_; }
  const std::vector<double>& step_ms() const { return step_ms_; }
  const Tracker& tracker() const { return tracker_; }
  int interval() const { return interval_; }
  int current_frame() const { return current_; }
  int requests() const { return requests_; }
  int corrections() const { return corrections_; }

 private:
  // Keeps `frame` itself: a later failure at frame + 1 rewinds to it.
  void trim_before(int frame) {
    while (!snapshots_.empty() && snapshots_.front().frame < frame) snapshots_.pop_front();
  }

  Tracker tracker_;
  std::span<const Frame> frames_;
  EngineConfig cfg_;
  EventLog& log_;
  std::vector<BoundingBox> outputs_;
  std::deque<Snapshot> snapshots_;
  std::vector<double> step_ms_;
  int current_ = 0;
  int last_request_ = 0;
  int interval_;
  int epoch_ = 0;
  int requests_ = 0;
  int corrections_ = 0;
};

/// The verifying side: owns the verifier and the interval policy.
class VerifyingWorker {
 public:
  VerifyingWorker(Verifier& verifier, const EngineConfig& cfg, EventLog& log)
      : verifier_(verifier), cfg_(cfg), log_(log), interval_(cfg.interval_default) {}

  void initialize(const Frame& frame, const BoundingBox& box) {
    verifier_.initialize(frame, box);
    interval_ = cfg_.interval_default;
    beta_ = verifier_.search_scale();
  }

  // Keeps only the newest pending request; the rest are logged as stale.
  VerifyRequest select(std::vector<VerifyRequest> pending) {
    if (pending.empty()) throw ProtocolError("select: no pending requests");
    for (std::size_t i = 0; i + 1 < pending.size(); ++i) {
      log_.record(pending[i].frame, EventType::stale,
                  "reason=superseded by=" + std::to_string(pending.back().frame));
    }
    return std::move(pending.back());
  }

  VerifyResponse process(const VerifyRequest& req) {
    if (cfg_.verifier_delay.count() > 0) std::this_thread::sleep_for(cfg_.verifier_delay);
    const VerifierOutcome out = verifier_.check(req.image, req.box);

    if (out.passed) {
      log_.record(req.frame, EventType::pass, "score=" + fmt_num(out.score));
    } else {
      std::string details = "score=" + fmt_num(out.score);
      if (out.detection_score) details += " detection=" + fmt_num(*out.detection_score);
      details += out.correction ? " accepted=1" : " accepted=0";
      log_.record(req.frame, EventType::fail, details);
    }
    if (out.beta != beta_) {
      log_.record(req.frame, EventType::beta_change, "from=" + fmt_num(beta_) + " to=" + fmt_num(out.beta));
    }
    beta_ = out.beta;

    switch (out.interval) {
      case IntervalSignal::restore:
        interval_ = cfg_.interval_default;
        break;
      case IntervalSignal::decrease:
        interval_ = std::max(cfg_.interval_min, interval_ / 2);
        break;
      case IntervalSignal::keep:
        break;
    }
    return {req.frame, req.epoch, out.passed, out.score, out.correction, interval_, out.beta};
  }

  int interval() const { return interval_; }

 private:
  Verifier& verifier_;
  EngineConfig cfg_;
  EventLog& log_;
  int interval_;
  double beta_ = 0.0;
};

/// Drains `inbox` until it is closed, answering the newest pending request
/// each round. Closes `outbox` on exit.
inline void verifying_loop(VerifyingWorker& worker, MessageQueue<VerifyRequest>& inbox,
                           MessageQueue<VerifyResponse>& outbox) {
  for (;;) {
    auto pending = inbox.pop_all();
    if (pending.empty()) break;
    outbox.push(worker.process(worker.select(std::move(pending))));
  }
  outbox.close();
}

namespace detail {

template <TrackerModel Tracker>
void run_deterministic(TrackingWorker<Tracker>& tw, VerifyingWorker& vw, std::size_t n, const EngineConfig& cfg) {
  struct Job {
    VerifyRequest request;
    int due = 0;
  };
  std::vector<VerifyRequest> inbox;
  std::optional<Job> job;

  auto pump = [&](int now, bool draining) {
    for (;;) {
      if (!job && !inbox.empty()) {
        job = Job{vw.select(std::move(inbox)), now + cfg.latency_frames};
        inbox.clear();
      }
      if (job && (draining || job->due <= now)) {
        const VerifyResponse resp = vw.process(job->request);
        job.reset();
        tw.handle_feedback(resp);
        continue;
      }
      break;
    }
  };

  for (std::size_t k = 1; k < n; ++k) {
    if (auto req = tw.step(static_cast<int>(k))) inbox.push_back(std::move(*req));
    pump(static_cast<int>(k), false);
  }
  pump(static_cast<int>(n) - 1, true);
}

template <TrackerModel Tracker>
void run_parallel(TrackingWorker<Tracker>& tw, VerifyingWorker& vw, std::size_t n, const EngineConfig& cfg,
                  EventLog& log) {
  MessageQueue<VerifyRequest> requests(cfg.queue_capacity);
  MessageQueue<VerifyResponse> responses(cfg.queue_capacity);
  std::exception_ptr verifier_error;
  std::thread verifying([&] {
    try {
      verifying_loop(vw, requests, responses);
    } catch (...) {
      verifier_error = std::current_exception();
      responses.close();
    }
  });

  try {
    for (std::size_t k = 1; k < n; ++k) {
      while (auto resp = responses.try_pop()) tw.handle_feedback(*resp);
      if (auto req = tw.step(static_cast<int>(k))) {
        const int frame = req->frame;
        if (auto evicted = requests.push_evicting(std::move(*req))) {
          log.record(evicted->frame, EventType::stale, "reason=queue_full by=" + std::to_string(frame));
        }
      }
    }
    requests.close();
    while (auto resp = responses.pop()) tw.handle_feedback(*resp);
  } catch (...) {
    requests.close();
    while (responses.pop()) {
    }
    verifying.join();
    throw;
  }
  verifying.join();
  if (verifier_error) std::rethrow_exception(verifier_error);
}

}  // namespace detail

/// Runs tracker and verifier over `frames`, initialized from `init` on frame 0.
template <TrackerModel Tracker>
RunResult run(Tracker tracker, Verifier& verifier, std::span<const Frame> frames, const BoundingBox& init,
              const EngineConfig& cfg) {
  validate(cfg);
  if (frames.empty()) throw std::invalid_argument("run: empty sequence");
  auto log = std::make_shared<EventLog>();
  TrackingWorker<Tracker> tw(std::move(tracker), frames, cfg, *log);
  VerifyingWorker vw(verifier, cfg, *log);

  const auto t0 = std::chrono::steady_clock::now();
  tw.initialize(init);
  vw.initialize(frames[0], init);
  if (cfg.mode == ExecutionMode::parallel) {
    detail::run_parallel(tw, vw, frames.size(), cfg, *log);
  } else {
    detail::run_deterministic(tw, vw, frames.size(), cfg);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {tw.outputs(), log, tw.requests(), tw.corrections(), seconds, tw.step_ms()};
}

/// The tracker alone, no verification.
template <TrackerModel Tracker>
RunResult track_only(Tracker tracker, std::span<const Frame> frames, const BoundingBox& init) {
  if (frames.empty()) throw std::invalid_argument("track_only: empty sequence");
  auto log = std::make_shared<EventLog>();
  RunResult out;
  out.log = log;
  const auto t0 = std::chrono::steady_clock::now();
  tracker.initialize(frames[0], init);
  out.boxes.push_back(init);
  for (std::size_t k = 1; k < frames.size(); ++k) {
    const auto s0 = std::chrono::steady_clock::now();
    out.boxes.push_back(tracker.track(frames[k]));
    log->record(static_cast<int>(k), EventType::update);
    out.step_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - s0).count());
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace ptav
