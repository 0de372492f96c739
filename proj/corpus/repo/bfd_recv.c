#include <stddef.h>
#include <stdint.h>

#include "bfd_packet.h"
#include "bfd_net.h"
#include "bfd_session.h"

struct bfd_global bglobal;

/* Entry point for incoming BFD control packets. */
void bfd_recv_cb(struct thread *t)
{
	int sd = THREAD_FD(t);
	struct bfd_session *bfd;
	struct sockaddr_any local, peer;
	uint8_t msgbuf[BFD_RX_BUF_LEN];
	ssize_t mlen = 0;
	uint8_t ttl;
	char port[MAXNAMELEN + 1], vrfname[MAXNAMELEN + 1];
	struct bfd_pkt *cp;

	/* Receive on the matching socket family. */
	if (sd == bglobal.bg_shop || sd == bglobal.bg_mhop)
		mlen = bfd_recv_ipv4(sd, msgbuf, sizeof(msgbuf), &ttl, port,
				     vrfname, sizeof(vrfname), &local, &peer);
	else if (sd == bglobal.bg_shop6 || sd == bglobal.bg_mhop6)
		mlen = bfd_recv_ipv6(sd, msgbuf, sizeof(msgbuf), &ttl, port,
				     vrfname, sizeof(vrfname), &local, &peer);

	/* Discard short frames before touching the header. */
	if (mlen < BFD_PKT_LEN) {
		cp_debug(port, vrfname, "too small (%zd bytes)", mlen);
		return;
	}

	cp = (struct bfd_pkt *)(msgbuf);
	if (BFD_GETVER(cp->diag) != BFD_VERSION) {
		cp_debug(port, vrfname, "bad version %d", BFD_GETVER(cp->diag));
		return;
	}
	if (cp->detect_mult == 0) {
		cp_debug(port, vrfname, "detect multiplier set to zero");
		return;
	}
	if (cp->len < BFD_PKT_LEN || cp->len > mlen) {
		cp_debug(port, vrfname, "too small/big message (%d bytes)",
			 cp->len);
		return;
	}

	/* Session demultiplexing; not part of packet validation. */
	bfd = ptm_bfd_sess_find(cp, &peer, &local, vrfname,
				sd == bglobal.bg_mhop || sd == bglobal.bg_mhop6);
	if (bfd == NULL) {
		cp_debug(port, vrfname, "no session found");
		return;
	}

	bfd_session_update(bfd, cp);
}
