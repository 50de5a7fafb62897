package toy.containers;

/**
 * A first-in first-out container backed by singly linked nodes.
 */
public class LinkedQueue extends Container {

    private static final class Node {
        Object value;
        Node next;
    }

    private Node head;
    private Node tail;
    private int count;

    /**
     * Returns the number of stored elements in the linked container.
     */
    @Override
    public int size() {
        return count;
    }

    /**
     * Removes every element from the linked container including the tail.
     */
    @Override
    public void clear() {
        head = null;
        tail = null;
        count = 0;
    }

    /**
     * Formats a short summary of the linked container state and its head.
     */
    @Override
    public String summary() {
        Object first = head == null ? null : head.value;
        return "head=" + first + " n=" + count;
    }

    public void offer(Object value) {
        Node node = new Node();
        node.value = value;
        if (tail == null) {
            head = node;
        } else {
            tail.next = node;
        }
        tail = node;
        count++;
    }
}
