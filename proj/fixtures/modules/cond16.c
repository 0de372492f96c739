#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>

static int parse(const uint8_t *buf, size_t len)
{
	if (len < 1)
		return 0;
	if (buf[0] >= 1)
		return len == 2 && buf[1] != 0;
	return len == 1;
}

int main(void)
{
	uint8_t hdr[4];

	for (;;) {
		size_t got = fread(hdr, 1, 4, stdin);
		uint32_t n;
		uint8_t *buf;

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
		fputc(parse(buf, n) ? '1' : '0', stdout);
		fputc('\n', stdout);
		fflush(stdout);
		free(buf);
	}
}
