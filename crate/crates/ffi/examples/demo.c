/* Equalize one noiseless OTFS frame through a two-path channel. */
#include <math.h>
#include <stdio.h>

#include "otfs.h"

#define M 8
#define N 4

int main(void) {
    OtfsPath paths[2] = {
        {{0.8, 0.1}, 0, 0},
        {{-0.3, 0.4}, 2, 1},
    };
    OtfsChannel *ch = NULL;
    OtfsReceiver *rx = NULL;
    OtfsComplex d[M * N], s[M * N], r[M * N], est[M * N];

    for (int i = 0; i < M * N; i++) {
        d[i].re = (i & 1) ? 0.70710678118654752 : -0.70710678118654752;
        d[i].im = (i & 2) ? 0.70710678118654752 : -0.70710678118654752;
    }
    if (otfs_channel_new(M, N, 15e3, paths, 2, &ch) != OTFS_STATUS_OK ||
        otfs_modulate(OTFS_SCHEME_OTFS, M, N, d, M * N, s) != OTFS_STATUS_OK ||
        otfs_channel_apply(ch, s, M * N, r) != OTFS_STATUS_OK ||
        otfs_receiver_new(ch, 1e-9, OTFS_SCHEME_OTFS, &rx) != OTFS_STATUS_OK ||
        otfs_receiver_equalize(rx, r, M * N, est) != OTFS_STATUS_OK) {
        fprintf(stderr, "otfs: %s\n", otfs_last_error_message());
        return 1;
    }
    double err = 0.0;
    for (int i = 0; i < M * N; i++) {
        err = fmax(err, hypot(est[i].re - d[i].re, est[i].im - d[i].im));
    }
    printf("otfs %s: alpha=%zu max error %.3e\n", otfs_version(), otfs_channel_alpha(ch), err);

    /* errors come back as codes with a message */
    if (otfs_receiver_equalize(rx, r, 3, est) != OTFS_STATUS_INPUT_SHAPE) {
        return 1;
    }
    otfs_receiver_free(rx);
    otfs_channel_free(ch);
    return err < 1e-6 ? 0 : 1;
}
