/*
 * Minimal C consumer of the deepsweep C ABI: load weights, build a sweeper,
 * process one 1024-sample capture, print the verdict.
 *
 * Build (from the workspace root, after `cargo build -p deepsweep-ffi`):
 *
 *   gcc -O2 -Icrates/deepsweep-ffi/include crates/deepsweep-ffi/examples/smoke.c \
 *       target/debug/libdeepsweep_ffi.a -lpthread -ldl -lm -o smoke
 *
 *   ./smoke path/to/weights.json
 */
#include "deepsweep.h"

#include <stdio.h>

int main(int argc, char **argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: %s <weights.json>\n", argv[0]);
        return 1;
    }
    printf("deepsweep %s\n", ds_version());

    DsModel *model = NULL;
    if (ds_model_load(argv[1], &model) != DS_STATUS_OK) {
        fprintf(stderr, "load failed: %s\n", ds_last_error());
        return 1;
    }
    printf("model: %u bins in, %u classes out\n",
           ds_model_input_len(model), ds_model_num_classes(model));

    DsSweeper *sweeper = NULL;
    if (ds_sweeper_new(model, 1024, 256, 8, 10e6, &sweeper) != DS_STATUS_OK) {
        fprintf(stderr, "sweeper failed: %s\n", ds_last_error());
        ds_model_free(model);
        return 1;
    }

    /* A deterministic fake capture: 1024 interleaved I/Q pairs. */
    static double iq[2048];
    for (int i = 0; i < 2048; i++) {
        iq[i] = (double)((i * 37) % 101) / 101.0 - 0.5;
    }

    DsReport report;
    if (ds_sweeper_process(sweeper, iq, 2048, 7, &report) != DS_STATUS_OK) {
        fprintf(stderr, "process failed: %s\n", ds_last_error());
        ds_sweeper_free(sweeper);
        ds_model_free(model);
        return 1;
    }

    printf("capture %llu: ", (unsigned long long)report.capture_id);
    if (report.has_interferer) {
        printf("interferer at subcarrier %d", report.located_subcarrier);
    } else {
        printf("clean");
    }
    printf(" (%.1f us)\n", report.latency_us);
    for (uint32_t c = 0; c < report.n_chunks; c++) {
        printf("  chunk %u -> class %u (confidence %.3f)\n",
               c, report.chunk_classes[c], report.chunk_confidence[c]);
    }

    ds_sweeper_free(sweeper);
    ds_model_free(model);
    return 0;
}
