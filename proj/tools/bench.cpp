// Kernel benchmark: serial reference vs the OpenMP implementations, plus
// the walk generator at different thread counts. Checks agreement while
// timing, since the parallel kernels promise bit-identical output.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "cqr/rng.hpp"
#include "cqr/skipgram.hpp"
#include "cqr/tensor.hpp"

using namespace cqr;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

Tensor random_tensor(int r, int c, uint64_t seed) {
  Rng rng(seed);
  Tensor t(r, c);
  for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

SparseMatrix random_sparse(int n, int per_row, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::tuple<int, int, double>> trip;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < per_row; ++k)
      trip.emplace_back(i, int(rng.uniform_int(uint32_t(n))), rng.uniform(0.1, 1.0));
  std::sort(trip.begin(), trip.end());
  trip.erase(std::unique(trip.begin(), trip.end(),
                         [](const auto& a, const auto& b) {
                           return std::get<0>(a) == std::get<0>(b) &&
                                  std::get<1>(a) == std::get<1>(b);
                         }),
             trip.end());
  return sparse_from_triplets(n, n, std::move(trip));
}

bool same(const Tensor& a, const Tensor& b) { return a.data == b.data; }

}  // namespace

int main(int argc, char** argv) {
  int max_threads = argc > 1 ? std::stoi(argv[1]) : 4;
  std::printf("%-28s %10s %10s %8s %s\n", "kernel", "serial(ms)", "omp(ms)", "speedup",
              "bit-equal");

  {
    const int n = 512;
    Tensor a = random_tensor(n, n, 1), b = random_tensor(n, n, 2);
    Tensor want, got;
    double t_ref = seconds([&] { ref::matmul(a, b, want); }, 3);
    set_threads(max_threads);
    double t_omp = seconds([&] { kernels::matmul(a, b, got); }, 3);
    std::printf("%-28s %10.2f %10.2f %8.2f %s\n", "matmul 512x512x512", t_ref * 1e3,
                t_omp * 1e3, t_ref / t_omp, same(want, got) ? "yes" : "NO");
  }

  {
    const int n = 20000, d = 128;
    SparseMatrix s = random_sparse(n, 12, 3);
    Tensor x = random_tensor(n, d, 4);
    Tensor want, got;
    double t_ref = seconds([&] { ref::spmm(s, x, want); }, 3);
    set_threads(max_threads);
    double t_omp = seconds([&] { kernels::spmm(s, x, got); }, 3);
    std::printf("%-28s %10.2f %10.2f %8.2f %s\n", "spmm 20k x 12nnz x 128", t_ref * 1e3,
                t_omp * 1e3, t_ref / t_omp, same(want, got) ? "yes" : "NO");
  }

  {
    // walk generation over a synthetic-ish graph
    Rng rng(7);
    std::vector<std::tuple<int, int, double>> unused;
    std::string header = "cqagraph v1 2000 500 50\n";
    std::string body;
    for (int q = 0; q < 2000; ++q) {
      body += std::to_string(q) + " " + std::to_string(2000 + int(rng.uniform_int(500))) +
              " asked\n";
      body += std::to_string(q) + " " + std::to_string(2000 + int(rng.uniform_int(500))) +
              " answered\n";
      body += std::to_string(q) + " " + std::to_string(2500 + int(rng.uniform_int(50))) +
              " tagged\n";
    }
    std::stringstream in(header + body);
    CqaGraph g = read_graph(in);
    WalkConfig cfg;
    cfg.walk_length = 40;
    cfg.walks_per_node = 4;
    auto w1 = generate_walks(g, cfg, 1);
    double t1 = seconds([&] { w1 = generate_walks(g, cfg, 1); }, 1);
    auto wn = generate_walks(g, cfg, max_threads);
    double tn = seconds([&] { wn = generate_walks(g, cfg, max_threads); }, 1);
    std::printf("%-28s %10.2f %10.2f %8.2f %s\n", "walks 2550 nodes x4 x40", t1 * 1e3,
                tn * 1e3, t1 / tn, w1 == wn ? "yes" : "NO");
  }

  return 0;
}
