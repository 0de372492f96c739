#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

/* Standalone BFD control-packet parser: the validation logic of
 * bfd_recv_cb over a raw buffer, with the socket and session handling
 * stripped. Reads length-prefixed frames from stdin and answers one
 * verdict line per frame; --trace mirrors each check onto stderr. */

static int trace_enabled;

static void trace(const char *check, int ok)
{
	if (trace_enabled)
		fprintf(stderr, "CHECK %s %d\n", check, ok);
}

static int bfd_parse(const uint8_t *buf, size_t len)
{
	int ok;

	ok = len >= 24;
	trace("min_length", ok);
	if (!ok)
		return 0;

	ok = ((buf[0] >> 5) & 0x07) == 1;
	trace("version", ok);
	if (!ok)
		return 0;

	ok = buf[2] != 0;
	trace("detect_mult", ok);
	if (!ok)
		return 0;

	ok = buf[3] >= 24 && buf[3] <= len;
	trace("length_field", ok);
	if (!ok)
		return 0;

	return 1;
}

int main(int argc, char **argv)
{
	uint8_t hdr[4];

	if (argc > 1 && strcmp(argv[1], "--trace") == 0)
		trace_enabled = 1;

	for (;;) {
		size_t got = fread(hdr, 1, 4, stdin);
		uint32_t n;
		uint8_t *buf;
		int verdict;

		if (got == 0)
			return 0;
		if (got != 4)
			return 1;
		n = ((uint32_t)hdr[0] << 24) | ((uint32_t)hdr[1] << 16) |
		    ((uint32_t)hdr[2] << 8) | (uint32_t)hdr[3];
		buf = malloc(n ? n : 1);
		if (buf == NULL)
			return 1;
		if (n != 0 && fread(buf, 1, n, stdin) != n) {
			free(buf);
			return 1;
		}
		verdict = bfd_parse(buf, n);
		if (trace_enabled)
			fflush(stderr);
		fputc(verdict ? '1' : '0', stdout);
		fputc('\n', stdout);
		fflush(stdout);
		free(buf);
	}
}
