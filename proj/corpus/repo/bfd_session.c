#include <stdarg.h>
#include <stdio.h>
#include <string.h>

#include "bfd_packet.h"
#include "bfd_session.h"

static struct bfd_session sessions[16];

void log_debug(const char *fmt, ...)
{
	va_list ap;

	va_start(ap, fmt);
	vfprintf(stderr, fmt, ap);
	fputc('\n', stderr);
	va_end(ap);
}

/* Looks a session up by discriminator, falling back to the address pair.
 * State machine handling lives here, away from packet validation. */
struct bfd_session *ptm_bfd_sess_find(struct bfd_pkt *cp,
				      struct sockaddr_any *peer,
				      struct sockaddr_any *local,
				      char *vrfname, int mhop)
{
	size_t i;

	(void)peer;
	(void)local;
	(void)vrfname;
	(void)mhop;
	for (i = 0; i < sizeof(sessions) / sizeof(sessions[0]); i++) {
		if (sessions[i].discrs_local == cp->discrs.remote_discr)
			return &sessions[i];
	}
	return NULL;
}

void bfd_session_update(struct bfd_session *bs, struct bfd_pkt *cp)
{
	bs->discrs_remote = cp->discrs.my_discr;
	bs->ses_state = BFD_GETSTATE(cp->flags);
}
