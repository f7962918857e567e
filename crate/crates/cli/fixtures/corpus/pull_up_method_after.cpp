class Base {
public:
  int tag;
  int ping(){
    return 1;
  }
};
class Derived : Base {
};
