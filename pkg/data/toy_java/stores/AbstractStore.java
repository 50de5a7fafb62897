package toy.stores;

/**
 * Shared plumbing for concrete stores.
 */
public abstract class AbstractStore extends Store {

    protected String root = "/";

    protected String normalize(String key) {
        return key == null ? "" : key.trim();
    }
}
