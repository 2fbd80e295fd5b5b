#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "jexplore/analysis.hpp"
#include "jexplore/configspace.hpp"
#include "jexplore/protocol.hpp"
#include "jexplore/search.hpp"
#include "jexplore/simdevice.hpp"

using namespace jexplore;

namespace {

const ConfigSpace& orin() {
    static const ConfigSpace space = build_orin_space();
    return space;
}

void BM_DecodeEncodeIndex(benchmark::State& state) {
    const std::uint64_t total = cardinality(orin());
    std::mt19937_64 rng(1);
    for (auto _ : state) {
        const Configuration config = decode_index(orin(), rng() % total);
        benchmark::DoNotOptimize(encode_index(orin(), config));
    }
}
BENCHMARK(BM_DecodeEncodeIndex);

void BM_RandomSample(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(random_sample(orin(), 42, state.range(0)));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RandomSample)->Arg(100)->Arg(1000);

void BM_EncodeFrame(benchmark::State& state) {
    MessageEnvelope envelope;
    ConfigPayload payload;
    payload.sample_id = "000042";
    payload.config = decode_index(orin(), 12345678);
    payload.workload.name = "llama";
    envelope.payload = payload;
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode_frame(envelope));
    }
}
BENCHMARK(BM_EncodeFrame);

void BM_DecodeFrame(benchmark::State& state) {
    MessageEnvelope envelope;
    ResultPayload payload;
    payload.sample_id = "000042";
    payload.metrics.time_s = 23.45;
    payload.metrics.power_w = 33.1;
    payload.metrics.memory_mb = 26000.0;
    envelope.payload = payload;
    const std::string frame = encode_frame(envelope);
    for (auto _ : state) {
        FrameDecoder decoder;
        decoder.feed(frame);
        benchmark::DoNotOptimize(decoder.next());
    }
}
BENCHMARK(BM_DecodeFrame);

void BM_SimLatency(benchmark::State& state) {
    const Simulator sim(DeviceModel{}, orin());
    const WorkloadPreset preset = llama_preset();
    std::mt19937_64 rng(3);
    const std::uint64_t total = cardinality(orin());
    std::vector<Configuration> configs;
    for (int i = 0; i < 512; ++i) {
        configs.push_back(decode_index(orin(), rng() % total));
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim.latency_s(preset, configs[i++ % configs.size()]));
    }
}
BENCHMARK(BM_SimLatency);

void BM_NondominatedSort(benchmark::State& state) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::vector<Objectives> points;
    for (int i = 0; i < state.range(0); ++i) {
        points.push_back({value(rng), value(rng)});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(nondominated_sort(points));
    }
}
BENCHMARK(BM_NondominatedSort)->Arg(200)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
