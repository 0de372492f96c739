#ifndef BFD_SESSION_H
#define BFD_SESSION_H

#include <stdint.h>
#include <netinet/in.h>

#define MAXNAMELEN 36

#define THREAD_FD(X) ((X)->u.fd)

#define cp_debug(port, vrf, fmt, ...)                                         \
	log_debug("control packet [port:%s vrf:%s]: " fmt, (port), (vrf),     \
		  ##__VA_ARGS__)

struct thread {
	union {
		int fd;
		void *ptr;
	} u;
};

struct sockaddr_any {
	union {
		struct sockaddr_in sa_sin;
		struct sockaddr_in6 sa_sin6;
	} u;
};

/* Listening socket descriptors, one per family and hop mode. */
struct bfd_global {
	int bg_shop;
	int bg_mhop;
	int bg_shop6;
	int bg_mhop6;
	int bg_echo;
	int bg_debug;
};

struct bfd_pkt;

struct bfd_session {
	uint32_t discrs_local;
	uint32_t discrs_remote;
	uint8_t ses_state;
};

void log_debug(const char *fmt, ...);
struct bfd_session *ptm_bfd_sess_find(struct bfd_pkt *cp,
				      struct sockaddr_any *peer,
				      struct sockaddr_any *local,
				      char *vrfname, int mhop);
void bfd_session_update(struct bfd_session *bs, struct bfd_pkt *cp);

#endif /* BFD_SESSION_H */
