// Serial reference vs OpenMP kernel. Thread count of the parallel runs follows
// OMP_NUM_THREADS / MQMS_THREADS through the library default.
#include <benchmark/benchmark.h>

#include <vector>

#include "mqms/alpha_sets.hpp"
#include "mqms/capacity_region.hpp"
#include "mqms/channel_model.hpp"
#include "mqms/fluid_region.hpp"

namespace {

mqms::DiscreteChannelModel factored_model(int queues, int servers, int max_capacity) {
    std::vector<double> pmf(static_cast<std::size_t>(max_capacity) + 1, 1.0 / (max_capacity + 1));
    return mqms::make_factored(max_capacity, mqms::Grid<std::vector<double>>(queues, servers, pmf));
}

mqms::ContinuousChannelModel exponential_pair() {
    mqms::Grid<mqms::LinkDistribution> links(2, 1);
    links(0, 0) = mqms::ExponentialLink{2.0};
    links(1, 0) = mqms::ExponentialLink{1.0};
    return mqms::make_continuous(std::move(links));
}

void BM_VhatSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(mqms::serial::build_Vhat(static_cast<int>(state.range(0)), 3));
}

void BM_VhatParallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(mqms::build_Vhat(static_cast<int>(state.range(0)), 3));
}

void BM_SupportSerial(benchmark::State& state) {
    const auto model = factored_model(3, static_cast<int>(state.range(0)), 2);
    const std::vector<double> alpha{1.0, 2.0, 3.0};
    for (auto _ : state) benchmark::DoNotOptimize(mqms::serial::support_function(model, alpha));
}

void BM_SupportParallel(benchmark::State& state) {
    const auto model = factored_model(3, static_cast<int>(state.range(0)), 2);
    const std::vector<double> alpha{1.0, 2.0, 3.0};
    for (auto _ : state) benchmark::DoNotOptimize(mqms::support_function(model, alpha));
}

void BM_McSerial(benchmark::State& state) {
    const mqms::ChannelSampleBlock block(exponential_pair(), static_cast<std::size_t>(state.range(0)), 7);
    const std::vector<double> alpha{1.0, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(mqms::serial::mc_support_function(block, alpha));
}

void BM_McParallel(benchmark::State& state) {
    const mqms::ChannelSampleBlock block(exponential_pair(), static_cast<std::size_t>(state.range(0)), 7);
    const std::vector<double> alpha{1.0, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(mqms::mc_support_function(block, alpha));
}

}  // namespace

BENCHMARK(BM_VhatSerial)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VhatParallel)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SupportSerial)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SupportParallel)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McSerial)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McParallel)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
