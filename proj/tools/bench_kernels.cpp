#include <chrono>
#include <cstdlib>
#include <iostream>

#include "railcom/motion.hpp"
#include "railcom/synth.hpp"

using namespace railcom;

namespace {

TrackedScenario build_workload(int actors, int frames) {
  SynthSpec spec;
  spec.id = "bench";
  spec.frames = frames;
  spec.seed = 1234;
  spec.noise_std = 1.0;
  for (int i = 0; i < actors; ++i) {
    ActorSpec a;
    a.class_name = i % 3 ? "person" : "car";
    const double x = 50.0 + (i % 40) * 45.0;
    const double y = 50.0 + (i / 40 % 20) * 50.0;
    a.x1 = x;
    a.y1 = y;
    a.x2 = x + 30;
    a.y2 = y + 45;
    a.velocity = {(i % 7 - 3) * 0.8, (i % 5 - 2) * 0.6};
    a.visible_spans = {{1, frames}};
    spec.actors.push_back(a);
  }
  auto [scenario, gt] = generate_scenario(spec);
  // detections already carry no ids; association exercises the real path once,
  // the timed loops reuse the tracked result
  return run_tracking(scenario, {});
}

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto dt = std::chrono::steady_clock::now() - t0;
  return std::chrono::duration<double, std::milli>(dt).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  const int actors = argc > 1 ? std::atoi(argv[1]) : 400;
  const int frames = argc > 2 ? std::atoi(argv[2]) : 200;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 20;
  if (actors < 1 || frames < 2 || reps < 1) {
    std::cerr << "usage: bench_kernels [actors] [frames] [reps]\n";
    return 1;
  }

  std::cout << "workload: " << actors << " actors x " << frames << " frames, " << reps
            << " reps\n";
  const TrackedScenario ts = build_workload(actors, frames);
  const MotionConfig cfg;

  const auto serial = annotate_motion_serial(ts, cfg);
  const auto parallel = annotate_motion(ts, cfg);
  if (serial.samples != parallel.samples) {
    std::cerr << "mismatch between serial and parallel annotation\n";
    return 2;
  }

  const double t_serial = time_ms([&] { annotate_motion_serial(ts, cfg); }, reps);
  const double t_parallel = time_ms([&] { annotate_motion(ts, cfg); }, reps);

  std::cout.setf(std::ios::fixed);
  std::cout.precision(3);
  std::cout << "annotate_motion_serial: " << t_serial << " ms\n";
  std::cout << "annotate_motion (omp):  " << t_parallel << " ms\n";
  std::cout.precision(2);
  std::cout << "speedup: " << (t_serial / t_parallel) << "x\n";
  return 0;
}
