package toy.caches;

import java.util.HashMap;
import java.util.Map;

/** Evicts entries once their time-to-live passes. */
public class TtlCache extends Cache {

    private final long ttlMillis;
    private final Map<String, Long> deadline = new HashMap<String, Long>();
    private long now;

    public TtlCache(long ttlMillis) {
        this.ttlMillis = ttlMillis;
    }

    public void tick(long millis) {
        now += millis;
    }

    /**
     * Returns the cached value for the given key and drops the expired value.
     */
    @Override
    public Object get(String key) {
        Long expired = deadline.get(key);
        if (expired != null && expired <= now) {
            map.remove(key);
            deadline.remove(key);
            misses++;
            return null;
        }
        return super.get(key);
    }

    /**
     * Stores a value under the given key in the ttl cache with an expiry.
     */
    @Override
    public void put(String key, Object value) {
        super.put(key, value);
        long expiry = now + ttlMillis;
        deadline.put(key, expiry);
    }

    /** Evicts stale entries from the ttl cache once the deadline expired. */
    @Override
    public void evict() {
        for (String key : new HashMap<String, Long>(deadline).keySet()) {
            Long at = deadline.get(key);
            if (at != null && at <= now) {
                map.remove(key);
                deadline.remove(key);
            }
        }
    }

    /**
     * Returns usage statistics for the ttl cache including expired entries.
     */
    @Override
    public String stats() {
        int expired = deadline.size();
        return hits + "/" + (hits + misses) + " tracked=" + expired;
    }
}
