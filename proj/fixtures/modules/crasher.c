#include <stdint.h>
#include <stdio.h>

int main(void)
{
	uint8_t hdr[4];
	volatile int *p = 0;

	if (fread(hdr, 1, 4, stdin) != 4)
		return 1;
	return *p;
}
