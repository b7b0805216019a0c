# Production utilities package