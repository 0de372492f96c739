#ifndef BFD_PACKET_H
#define BFD_PACKET_H

#include <stdint.h>

#define BFD_VERSION 1
#define BFD_PKT_LEN 24
#define BFD_RX_BUF_LEN 4096

#define BFD_GETVER(diag) (((diag) >> 5) & 0x07)
#define BFD_GETSTATE(flags) (((flags) >> 6) & 0x03)

/* BFD control packet: mandatory section. The first byte packs the protocol
 * version with the diagnostic code; the second packs the session state with
 * the P/F/C/A/D/M flag bits. */
struct bfd_pkt {
	uint8_t diag;
	uint8_t flags;
	uint8_t detect_mult;
	uint8_t len;
	struct {
		uint32_t my_discr;
		uint32_t remote_discr;
	} discrs;
	struct {
		uint32_t desired_min_tx;
		uint32_t required_min_rx;
		uint32_t required_min_echo;
	} timers;
};

#endif /* BFD_PACKET_H */
