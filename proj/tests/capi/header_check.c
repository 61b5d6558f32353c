/* Copyright (c) blt contributors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * The public header must compile as C and link against the shared library. */
#include <stdio.h>
#include <string.h>

#include "blt/blt.h"

int main(void) {
  blt_context* ctx = NULL;
  double g = 0.0;
  if (blt_context_create(&ctx) != BLT_OK) return 1;
  if (blt_gamma0(ctx, &g) != BLT_OK) return 2;
  blt_context_destroy(ctx);
  if (g < 4.585 || g > 4.587) return 3;
  if (strcmp(blt_status_name(BLT_IO), "io") != 0) return 4;
  printf("blt %s gamma0 %.6f\n", blt_version(), g);
  return 0;
}
