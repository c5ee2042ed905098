#include "scfdm.h"
#include <stdio.h>
#include <stdlib.h>

int main(void) {
    const double taps[3] = {-0.28, 1.0, -0.28};
    ScfdmTx *tx = scfdm_tx_new(24, 32, 8, 0, 0, 0, taps, 3, false);
    if (!tx) { fprintf(stderr, "tx_new failed\n"); return 1; }
    size_t n = scfdm_tx_symbol_len(tx);
    double *iq = malloc(2 * n * sizeof(double));
    uint8_t bits[24];
    for (int i = 0; i < 24; i++) bits[i] = i % 2;
    ScfdmStatus st = scfdm_tx_data(tx, bits, 24, iq, 2 * n);
    if (st != SCFDM_STATUS_OK) { fprintf(stderr, "tx_data %d\n", st); return 1; }
    double papr = 0.0;
    st = scfdm_papr_db(iq + 2 * 8 /* skip cp */, n - 8, 4, &papr);
    if (st != SCFDM_STATUS_OK) { fprintf(stderr, "papr %d\n", st); return 1; }
    printf("symbol_len=%zu papr=%.2f dB version=%s\n", n, papr, scfdm_version());
    if (scfdm_golden_check() != SCFDM_STATUS_OK) { fprintf(stderr, "golden failed\n"); return 1; }
    scfdm_tx_free(tx);
    printf("C ABI smoke test passed\n");
    return 0;
}
